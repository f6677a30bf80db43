#!/usr/bin/env python3
"""Regenerates include/relaykit/features/wavelet_filters.hpp from PyWavelets.

Usage: python3 tools/gen_wavelet_tables.py > include/relaykit/features/wavelet_filters.hpp
"""
import pywt

DAUBECHIES = [f"db{i}" for i in range(1, 11)]
SYMLETS = [f"sym{i}" for i in range(2, 11)]
COIFLETS = [f"coif{i}" for i in range(1, 6)]
SPLINE_ORDERS = ["1.1", "2.2", "3.1", "3.3", "3.9", "4.4"]
BIOR = [f"bior{o}" for o in SPLINE_ORDERS]
RBIO = [f"rbio{o}" for o in SPLINE_ORDERS]


def family_of(name):
    for prefix, fam in (("rbio", "reverse_biorthogonal"), ("bior", "biorthogonal"),
                        ("coif", "coiflet"), ("sym", "symlet"), ("db", "daubechies")):
        if name.startswith(prefix):
            return fam
    raise ValueError(name)


def arr(values):
    return "{" + ", ".join(repr(float(v)) for v in values) + "}"


def main():
    names = DAUBECHIES + SYMLETS + COIFLETS + BIOR + RBIO
    out = []
    out.append("// Generated by tools/gen_wavelet_tables.py. Do not edit by hand.")
    out.append("#pragma once")
    out.append("")
    out.append("#include <array>")
    out.append("#include <span>")
    out.append("#include <string_view>")
    out.append("")
    out.append("namespace relaykit::features::detail {")
    out.append("")
    out.append("enum class WaveletFamily { daubechies, symlet, coiflet, biorthogonal, reverse_biorthogonal };")
    out.append("")
    out.append("struct FilterBankTable {")
    out.append("  std::string_view name;")
    out.append("  WaveletFamily family;")
    out.append("  bool orthogonal;")
    out.append("  std::span<const double> dec_lo, dec_hi, rec_lo, rec_hi;")
    out.append("};")
    out.append("")
    for n in names:
        w = pywt.Wavelet(n)
        ident = n.replace(".", "_")
        for part in ("dec_lo", "dec_hi", "rec_lo", "rec_hi"):
            vals = getattr(w, part)
            out.append(f"inline constexpr std::array<double, {len(vals)}> k_{ident}_{part} = {arr(vals)};")
    out.append("")
    out.append(f"inline constexpr std::array<FilterBankTable, {len(names)}> k_filter_banks = {{{{")
    for n in names:
        w = pywt.Wavelet(n)
        ident = n.replace(".", "_")
        fam = family_of(n)
        ortho = "true" if fam in ("daubechies", "symlet", "coiflet") else "false"
        out.append(f"  {{\"{n}\", WaveletFamily::{fam}, {ortho}, k_{ident}_dec_lo, k_{ident}_dec_hi, "
                   f"k_{ident}_rec_lo, k_{ident}_rec_hi}},")
    out.append("}};")
    out.append("")
    out.append("}  // namespace relaykit::features::detail")
    print("\n".join(out))


if __name__ == "__main__":
    main()
