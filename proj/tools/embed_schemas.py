#!/usr/bin/env python3
"""Writes include/relaykit/cli/schemas.hpp from schemas/*.schema.json."""
import json
import pathlib

root = pathlib.Path(__file__).resolve().parent.parent
names = ["gen", "features", "train", "eval", "classify"]
out = ["#pragma once", "", "// Generated by tools/embed_schemas.py from schemas/. Do not edit.", "",
       "#include <string_view>", "", "namespace relaykit::cli::schemas {", ""]
for n in names:
    text = json.dumps(json.loads((root / "schemas" / f"{n}.schema.json").read_text()), separators=(",", ":"))
    out.append(f'inline constexpr std::string_view {n} = R"json({text})json";')
    out.append("")
out.append("}  // namespace relaykit::cli::schemas")
(root / "include/relaykit/cli/schemas.hpp").write_text("\n".join(out) + "\n")
