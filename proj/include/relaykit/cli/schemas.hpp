#pragma once

// Generated by tools/embed_schemas.py from schemas/. Do not edit.

#include <string_view>

namespace relaykit::cli::schemas {

inline constexpr std::string_view gen = R"json({"$schema":"http://json-schema.org/draft-07/schema#","title":"relaykit gen config","type":"object","properties":{"seed":{"type":"integer","minimum":0},"jobs":{"type":"integer","minimum":1},"out":{"type":"string"},"sampling":{"$ref":"#/definitions/sampling"},"classes":{"anyOf":[{"enum":["default"]},{"type":"array","items":{"type":"string"}}]},"per_class":{"type":"integer","minimum":0},"snr_db":{"type":["number","null"]},"scenarios":{"type":"array","items":{"type":"object","properties":{"label":{"type":"string"},"class":{"type":"string"},"n_cycles":{"type":"integer","minimum":1},"amplitude_pu":{"type":"number","exclusiveMinimum":0},"dc_tau_s":{"type":"number","exclusiveMinimum":0},"harmonic_mix":{"type":"object","additionalProperties":{"type":"number","minimum":0}},"saturation_knee":{"type":"number","exclusiveMinimum":-1,"maximum":1},"inception_index":{"type":"integer","minimum":0},"seed":{"type":"integer","minimum":0},"baseline_pu":{"type":"number","minimum":0}},"required":["label"],"additionalProperties":false}}},"required":["out"],"additionalProperties":false,"definitions":{"sampling":{"type":"object","properties":{"sample_rate_hz":{"type":"number","exclusiveMinimum":0},"nominal_freq_hz":{"type":"number","exclusiveMinimum":0}},"additionalProperties":false}}})json";

inline constexpr std::string_view features = R"json({"$schema":"http://json-schema.org/draft-07/schema#","title":"relaykit features config","type":"object","properties":{"seed":{"type":"integer","minimum":0},"jobs":{"type":"integer","minimum":1},"out":{"type":"string"},"corpus":{"type":"string"},"cascade":{"$ref":"#/definitions/cascade"}},"required":["corpus","out"],"additionalProperties":false,"definitions":{"cascade":{"type":"object","properties":{"sampling":{"$ref":"#/definitions/sampling"},"detector":{"type":"object","properties":{"method":{"enum":["ed","cdf"]},"alpha":{"type":"number","exclusiveMinimum":0},"th":{"type":"number","exclusiveMinimum":0},"pre_cycles":{"type":"number","minimum":0},"post_cycles":{"type":"number","minimum":1}},"additionalProperties":false},"stages":{"anyOf":[{"enum":["default","swing"]},{"type":"array","minItems":1,"items":{"$ref":"#/definitions/stage"}}]},"cv_folds":{"type":"integer","minimum":0},"capture_snr_db":{"type":["number","null"]},"seed":{"type":"integer","minimum":0},"model":{"$ref":"#/definitions/model"}},"additionalProperties":false},"features":{"type":"object","properties":{"preset":{"enum":["detect","locate","series_type","exciting_type","pt_type","transients"]},"set":{"enum":["td5","we6","wc","f5","swing6","ar_relay"]},"wavelet":{"type":"object","properties":{"name":{"type":"string"},"level":{"type":"integer","minimum":1}},"required":["name","level"],"additionalProperties":false},"change_quantile_bounds":{"type":"array","items":{"type":"array","items":{"type":"number","minimum":0,"maximum":1}}},"ar_lag":{"type":"integer","minimum":1},"fft_bins":{"type":"array","items":{"type":"integer","minimum":0}},"welch":{"type":"object","properties":{"segment_len":{"type":"integer","minimum":1},"overlap_fraction":{"type":"number","minimum":0,"maximum":1},"window":{"type":"string"}},"additionalProperties":false},"trend_chunk_len":{"type":"integer","minimum":1},"trends":{"type":"array","items":{"type":"object","properties":{"chunk_len":{"type":"integer","minimum":1},"attr":{"type":"string"},"agg":{"type":"string"}},"required":["chunk_len","attr","agg"],"additionalProperties":false}},"welch_bins":{"type":"array","items":{"type":"integer","minimum":0}},"ar_indices":{"type":"array","items":{"type":"integer","minimum":1}},"we_wavelets":{"type":"array","items":{"type":"string"}},"wc_wavelets":{"type":"array","items":{"type":"object","properties":{"name":{"type":"string"},"level":{"type":"integer","minimum":1}},"required":["name","level"],"additionalProperties":false}}},"additionalProperties":false},"model":{"type":"object","properties":{"family":{"enum":["decision_tree","random_forest","gradient_boosting","xgboost","knn","naive_bayes"]},"params":{"type":"object"}},"required":["family"],"additionalProperties":false},"sampling":{"type":"object","properties":{"sample_rate_hz":{"type":"number","exclusiveMinimum":0},"nominal_freq_hz":{"type":"number","exclusiveMinimum":0}},"additionalProperties":false},"stage":{"type":"object","properties":{"name":{"type":"string"},"kind":{"enum":["detect","locate","fault_type","disturbance_type","swing_event","swing_stability","swing_symmetry"]},"unit":{"enum":["power_transformer","ispar_series","ispar_exciting"]},"features":{"$ref":"#/definitions/features"},"pre_cycles":{"type":"number","minimum":0},"post_cycles":{"type":"number","exclusiveMinimum":0},"model":{"$ref":"#/definitions/model"}},"required":["name","kind"],"additionalProperties":false}}})json";

inline constexpr std::string_view train = R"json({"$schema":"http://json-schema.org/draft-07/schema#","title":"relaykit train config","type":"object","properties":{"seed":{"type":"integer","minimum":0},"jobs":{"type":"integer","minimum":1},"out":{"type":"string"},"corpus":{"type":"string"},"cascade":{"$ref":"#/definitions/cascade"},"resume":{"type":"string"}},"required":["corpus","out"],"additionalProperties":false,"definitions":{"cascade":{"type":"object","properties":{"sampling":{"$ref":"#/definitions/sampling"},"detector":{"type":"object","properties":{"method":{"enum":["ed","cdf"]},"alpha":{"type":"number","exclusiveMinimum":0},"th":{"type":"number","exclusiveMinimum":0},"pre_cycles":{"type":"number","minimum":0},"post_cycles":{"type":"number","minimum":1}},"additionalProperties":false},"stages":{"anyOf":[{"enum":["default","swing"]},{"type":"array","minItems":1,"items":{"$ref":"#/definitions/stage"}}]},"cv_folds":{"type":"integer","minimum":0},"capture_snr_db":{"type":["number","null"]},"seed":{"type":"integer","minimum":0},"model":{"$ref":"#/definitions/model"}},"additionalProperties":false},"features":{"type":"object","properties":{"preset":{"enum":["detect","locate","series_type","exciting_type","pt_type","transients"]},"set":{"enum":["td5","we6","wc","f5","swing6","ar_relay"]},"wavelet":{"type":"object","properties":{"name":{"type":"string"},"level":{"type":"integer","minimum":1}},"required":["name","level"],"additionalProperties":false},"change_quantile_bounds":{"type":"array","items":{"type":"array","items":{"type":"number","minimum":0,"maximum":1}}},"ar_lag":{"type":"integer","minimum":1},"fft_bins":{"type":"array","items":{"type":"integer","minimum":0}},"welch":{"type":"object","properties":{"segment_len":{"type":"integer","minimum":1},"overlap_fraction":{"type":"number","minimum":0,"maximum":1},"window":{"type":"string"}},"additionalProperties":false},"trend_chunk_len":{"type":"integer","minimum":1},"trends":{"type":"array","items":{"type":"object","properties":{"chunk_len":{"type":"integer","minimum":1},"attr":{"type":"string"},"agg":{"type":"string"}},"required":["chunk_len","attr","agg"],"additionalProperties":false}},"welch_bins":{"type":"array","items":{"type":"integer","minimum":0}},"ar_indices":{"type":"array","items":{"type":"integer","minimum":1}},"we_wavelets":{"type":"array","items":{"type":"string"}},"wc_wavelets":{"type":"array","items":{"type":"object","properties":{"name":{"type":"string"},"level":{"type":"integer","minimum":1}},"required":["name","level"],"additionalProperties":false}}},"additionalProperties":false},"model":{"type":"object","properties":{"family":{"enum":["decision_tree","random_forest","gradient_boosting","xgboost","knn","naive_bayes"]},"params":{"type":"object"}},"required":["family"],"additionalProperties":false},"sampling":{"type":"object","properties":{"sample_rate_hz":{"type":"number","exclusiveMinimum":0},"nominal_freq_hz":{"type":"number","exclusiveMinimum":0}},"additionalProperties":false},"stage":{"type":"object","properties":{"name":{"type":"string"},"kind":{"enum":["detect","locate","fault_type","disturbance_type","swing_event","swing_stability","swing_symmetry"]},"unit":{"enum":["power_transformer","ispar_series","ispar_exciting"]},"features":{"$ref":"#/definitions/features"},"pre_cycles":{"type":"number","minimum":0},"post_cycles":{"type":"number","exclusiveMinimum":0},"model":{"$ref":"#/definitions/model"}},"required":["name","kind"],"additionalProperties":false}}})json";

inline constexpr std::string_view eval = R"json({"$schema":"http://json-schema.org/draft-07/schema#","title":"relaykit eval config","type":"object","properties":{"seed":{"type":"integer","minimum":0},"jobs":{"type":"integer","minimum":1},"out":{"type":"string"},"corpus":{"type":"string"},"model":{"type":"string"}},"required":["corpus","model","out"],"additionalProperties":false})json";

inline constexpr std::string_view classify = R"json({"$schema":"http://json-schema.org/draft-07/schema#","title":"relaykit classify config","type":"object","properties":{"seed":{"type":"integer","minimum":0},"jobs":{"type":"integer","minimum":1},"out":{"type":"string"},"input":{"type":"string"},"voltage":{"type":"string"},"model":{"type":"string"},"mode":{"enum":["event","swing"]}},"required":["input","model"],"additionalProperties":false})json";

}  // namespace relaykit::cli::schemas
