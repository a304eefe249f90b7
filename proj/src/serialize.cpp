#include "easc/serialize.hpp"

#include "easc/error.hpp"

namespace easc {

using nlohmann::json;

namespace {

double number(const json& j, const char* key) {
    if (!j.is_number()) throw Error(ErrorCode::Validation, std::string(key) + " must be a number");
    return j.get<double>();
}

} // namespace

json to_json(const model::ReservoirSpectrum& spectrum) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, model::FlatSpectrum>) {
                return {{"kind", "flat"}};
            } else if constexpr (std::is_same_v<T, model::PowerLawSpectrum>) {
                return {{"kind", "power_law"}, {"exponent", s.exponent}};
            } else {
                json samples = json::array();
                for (std::size_t i = 0; i < s.frequencies.size(); ++i) {
                    samples.push_back({s.frequencies[i], s.densities[i]});
                }
                return {{"kind", "tabulated"}, {"samples", samples}};
            }
        },
        spectrum.variant());
}

json to_json(const model::SystemConfig& c) {
    return {{"omega0", c.omega0},
            {"coupling", c.coupling},
            {"gamma1", c.gamma1},
            {"gamma2", c.gamma2},
            {"spectrum1", to_json(c.spectrum1)},
            {"spectrum2", to_json(c.spectrum2)},
            {"ei_mode", model::to_string(c.ei_mode)},
            {"diagonal_mode", model::to_string(c.diagonal_mode)}};
}

model::ReservoirSpectrum spectrum_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "flat") return model::ReservoirSpectrum::flat();
        throw Error(ErrorCode::Validation, "unknown spectrum '" + s + "'");
    }
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw Error(ErrorCode::Validation, "spectrum must be \"flat\" or an object with a kind");
    }
    const auto kind = j["kind"].get<std::string>();
    auto allow = [&](std::initializer_list<const char*> keys) {
        for (const auto& [k, v] : j.items()) {
            if (k == "kind") continue;
            if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
                throw Error(ErrorCode::Validation, "unknown spectrum key '" + k + "'");
            }
        }
    };
    if (kind == "flat") {
        allow({});
        return model::ReservoirSpectrum::flat();
    }
    if (kind == "power_law") {
        allow({"exponent"});
        if (!j.contains("exponent")) throw Error(ErrorCode::Validation, "power_law needs an exponent");
        return model::ReservoirSpectrum::power_law(number(j["exponent"], "exponent"));
    }
    if (kind == "tabulated") {
        allow({"file", "samples"});
        if (j.contains("file") == j.contains("samples")) {
            throw Error(ErrorCode::Validation, "tabulated spectrum needs exactly one of file or samples");
        }
        if (j.contains("file")) {
            if (!j["file"].is_string()) throw Error(ErrorCode::Validation, "file must be a string");
            std::filesystem::path p = j["file"].get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            return model::load_spectrum_csv(p);
        }
        std::vector<std::pair<double, double>> samples;
        if (!j["samples"].is_array()) throw Error(ErrorCode::Validation, "samples must be an array");
        for (const auto& row : j["samples"]) {
            if (!row.is_array() || row.size() != 2) {
                throw Error(ErrorCode::Validation, "each sample must be [omega, rho]");
            }
            samples.emplace_back(number(row[0], "omega"), number(row[1], "rho"));
        }
        return model::ReservoirSpectrum::tabulated(samples);
    }
    throw Error(ErrorCode::Validation, "unknown spectrum kind '" + kind + "'");
}

model::SystemConfig system_from_json(const json& j, const std::filesystem::path& base_dir,
                                     model::SystemConfig c) {
    if (j.contains("omega0")) c.omega0 = number(j["omega0"], "omega0");
    if (j.contains("coupling")) c.coupling = number(j["coupling"], "coupling");
    if (j.contains("gamma1")) c.gamma1 = number(j["gamma1"], "gamma1");
    if (j.contains("gamma2")) c.gamma2 = number(j["gamma2"], "gamma2");
    if (j.contains("spectrum")) c.spectrum1 = c.spectrum2 = spectrum_from_json(j["spectrum"], base_dir);
    if (j.contains("spectrum1")) c.spectrum1 = spectrum_from_json(j["spectrum1"], base_dir);
    if (j.contains("spectrum2")) c.spectrum2 = spectrum_from_json(j["spectrum2"], base_dir);
    auto text = [](const json& v, const char* key) {
        if (!v.is_string()) throw Error(ErrorCode::Validation, std::string(key) + " must be a string");
        return v.get<std::string>();
    };
    if (j.contains("ei_mode")) c.ei_mode = model::parse_ei_mode(text(j["ei_mode"], "ei_mode"));
    if (j.contains("diagonal_mode")) {
        c.diagonal_mode = model::parse_diagonal_mode(text(j["diagonal_mode"], "diagonal_mode"));
    }
    return c;
}

} // namespace easc
