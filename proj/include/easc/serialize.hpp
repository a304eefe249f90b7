// serialize.hpp: JSON form of SystemConfig and reservoir spectra

#pragma once

#include <filesystem>

#include <json.hpp>

#include "easc/model.hpp"

namespace easc {

nlohmann::json to_json(const model::ReservoirSpectrum& spectrum);
nlohmann::json to_json(const model::SystemConfig& config);

// Spectrum forms: "flat", {"kind": "power_law", "exponent": n},
// {"kind": "tabulated", "file": path} or {"kind": "tabulated", "samples": [[ω, ρ], ...]}.
// Relative file paths resolve against base_dir.
model::ReservoirSpectrum spectrum_from_json(const nlohmann::json& j,
                                            const std::filesystem::path& base_dir);

// Reads the physical keys (omega0, coupling, gamma1, gamma2, spectrum,
// spectrum1, spectrum2, ei_mode, diagonal_mode) present in j on top of base.
// Unknown keys are the caller's concern.
model::SystemConfig system_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                     model::SystemConfig base = {});

} // namespace easc
