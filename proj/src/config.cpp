#include "geophase/config.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "geophase/circle.hpp"
#include "geophase/propagator.hpp"

namespace geophase {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    }
    if (trim(text.substr(used)).size() != 0) {
        throw ConfigError(key + ": trailing characters in '" + text + "'");
    }
    return v;
}

std::size_t to_count(const std::string& key, const std::string& text) {
    const double v = to_double(key, text);
    if (v < 0 || v != std::floor(v)) throw ConfigError(key + ": expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!trim(item).empty()) out.push_back(to_double(key, trim(item)));
    }
    return out;
}

template <class E>
E to_enum(const std::string& key, const std::string& text, const std::map<std::string, E>& names) {
    const auto it = names.find(trim(text));
    if (it == names.end()) {
        std::string allowed;
        for (const auto& [n, v] : names) allowed += (allowed.empty() ? "" : ", ") + n;
        throw ConfigError(key + ": '" + text + "' is not one of {" + allowed + "}");
    }
    return it->second;
}

const std::map<std::string, Gauge> gauge_names{{"correlated_minus", Gauge::CorrelatedMinus},
                                               {"northern_plus", Gauge::NorthernPlus},
                                               {"southern_plus", Gauge::SouthernPlus}};
const std::map<std::string, InitKind> init_names{{"correlated", InitKind::Correlated},
                                                 {"uncorrelated", InitKind::Uncorrelated}};
const std::map<std::string, Sampling> sampling_names{{"bilinear", Sampling::Bilinear},
                                                     {"grid_snapped", Sampling::GridSnapped}};
const std::map<std::string, EmfForm> form_names{{"reduced", EmfForm::Reduced},
                                                {"full", EmfForm::Full}};

template <class E>
std::string name_of(E value, const std::map<std::string, E>& names) {
    for (const auto& [n, v] : names) {
        if (v == value) return n;
    }
    return "?";
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string list(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ", ") + num(x);
    return s;
}

bool is_multiple(double value, double unit) {
    const double r = value / unit;
    return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
}

}  // namespace

std::string to_string(Gauge g) { return name_of(g, gauge_names); }
std::string to_string(InitKind k) { return name_of(k, init_names); }
std::string to_string(Sampling s) { return name_of(s, sampling_names); }
std::string to_string(EmfForm f) { return name_of(f, form_names); }

Grid2D RunConfig::grid() const { return Grid2D(n_x, n_y, length_x, length_y); }

std::size_t RunConfig::steps_for(double au) const {
    return static_cast<std::size_t>(std::llround(au / dt));
}

std::size_t RunConfig::n_steps() const { return steps_for(t_final_fs / units::au_time_to_fs); }

std::vector<double> RunConfig::tracked_radii() const {
    std::vector<double> out = radii;
    for (double r : emf_radii) {
        if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
    }
    return out;
}

void RunConfig::validate() const {
    try {
        model.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[model] ") + e.what());
    }
    Grid2D g;
    try {
        g = grid();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[grid] ") + e.what());
    }
    PropagatorConfig pc;
    pc.dt = dt;
    try {
        pc.validate(model, g);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[propagator] ") + e.what());
    }
    if (!(t_final_fs > 0.0)) throw ConfigError("[propagator] t_final_fs must be positive");
    if (!(max_norm_drift > 0.0)) throw ConfigError("[propagator] max_norm_drift must be positive");
    if (!(max_edge_density > 0.0)) throw ConfigError("[propagator] max_edge_density must be positive");
    if (!(epsilon_th >= 0.0)) throw ConfigError("[fields] epsilon_th must be >= 0");
    if (!(pole_delta > 0.0 && pole_delta < 1.0)) throw ConfigError("[paths] pole_delta must lie in (0, 1)");

    const std::pair<const char*, double> cadences[] = {
        {"phase_au", phase_au},         {"emf_au", emf_au},
        {"observables_au", observables_au}, {"snapshot_au", snapshot_au}, {"checkpoint_au", checkpoint_au}};
    for (const auto& [key, value] : cadences) {
        if (!(value > 0.0) || !is_multiple(value, dt)) {
            throw ConfigError(std::string("[cadence] ") + key + " = " + num(value) +
                              " is not a positive integer multiple of dt = " + num(dt));
        }
    }
    if (!(fd_span_au > 0.0)) throw ConfigError("[cadence] fd_span_au must be positive");
    if (!(emf_max_turn > 0.0)) throw ConfigError("[paths] emf_max_turn must be positive");
    if (radii.empty()) throw ConfigError("[paths] radii must list at least one radius");
    for (double r : tracked_radii()) {
        try {
            check_resolution(make_circle(g, r, n_points, sampling), g);
        } catch (const PathError& e) {
            throw ConfigError("[paths] radius " + num(r) + ": " + e.what());
        }
    }
    for (double r : emf_radii) {
        const std::size_t band = circle_band_samples(g, r);
        if (emf_points < band) {
            throw ConfigError("[paths] emf_points = " + std::to_string(emf_points) +
                              " is below the " + std::to_string(band) +
                              " angular samples needed for radius " + num(r));
        }
    }
    try {
        initial_state(model, g);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[grid] ") + e.what());
    }
}

std::string RunConfig::canonical() const {
    std::ostringstream os;
    os << "[model]\n"
       << "mass_amu = " << num(model.mass_amu) << '\n'
       << "omega_x = " << num(model.omega_x) << '\n'
       << "omega_y = " << num(model.omega_y) << '\n'
       << "kappa_x = " << num(model.kappa_x) << '\n'
       << "kappa_y = " << num(model.kappa_y) << '\n'
       << "gauge = " << to_string(model.gauge) << '\n'
       << "init_kind = " << to_string(model.init_kind) << '\n'
       << "[grid]\n"
       << "n_x = " << n_x << '\n'
       << "n_y = " << n_y << '\n'
       << "length_x = " << num(length_x) << '\n'
       << "length_y = " << num(length_y) << '\n'
       << "[propagator]\n"
       << "dt = " << num(dt) << '\n'
       << "t_final_fs = " << num(t_final_fs) << '\n'
       << "max_norm_drift = " << num(max_norm_drift) << '\n'
       << "max_edge_density = " << num(max_edge_density) << '\n'
       << "[paths]\n"
       << "radii = " << list(radii) << '\n'
       << "emf_radii = " << list(emf_radii) << '\n'
       << "n_points = " << n_points << '\n'
       << "emf_points = " << emf_points << '\n'
       << "emf_max_turn = " << num(emf_max_turn) << '\n'
       << "sampling = " << to_string(sampling) << '\n'
       << "pole_delta = " << num(pole_delta) << '\n'
       << "[fields]\n"
       << "epsilon_th = " << num(epsilon_th) << '\n'
       << "emf_form = " << to_string(emf_form) << '\n'
       << "[cadence]\n"
       << "phase_au = " << num(phase_au) << '\n'
       << "emf_au = " << num(emf_au) << '\n'
       << "fd_span_au = " << num(fd_span_au) << '\n'
       << "observables_au = " << num(observables_au) << '\n'
       << "snapshot_au = " << num(snapshot_au) << '\n'
       << "checkpoint_au = " << num(checkpoint_au) << '\n';
    return os.str();
}

std::string RunConfig::hash() const {
    const std::string text = canonical();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) {
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return os.str();
}

RunConfig parse_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }
    RunConfig c;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError("key '" + section + "' outside any [section]");
        }
        for (const auto& [key_raw, node] : body) {
            const std::string key = section + "." + key_raw;
            const std::string v = node.data();
            if (key == "model.mass_amu") c.model.mass_amu = to_double(key, v);
            else if (key == "model.omega_x") c.model.omega_x = to_double(key, v);
            else if (key == "model.omega_y") c.model.omega_y = to_double(key, v);
            else if (key == "model.omega") c.model.omega_x = c.model.omega_y = to_double(key, v);
            else if (key == "model.kappa_x") c.model.kappa_x = to_double(key, v);
            else if (key == "model.kappa_y") c.model.kappa_y = to_double(key, v);
            else if (key == "model.kappa") c.model.kappa_x = c.model.kappa_y = to_double(key, v);
            else if (key == "model.gauge") c.model.gauge = to_enum(key, v, gauge_names);
            else if (key == "model.init_kind") c.model.init_kind = to_enum(key, v, init_names);
            else if (key == "grid.n") c.n_x = c.n_y = to_count(key, v);
            else if (key == "grid.n_x") c.n_x = to_count(key, v);
            else if (key == "grid.n_y") c.n_y = to_count(key, v);
            else if (key == "grid.length") c.length_x = c.length_y = to_double(key, v);
            else if (key == "grid.length_x") c.length_x = to_double(key, v);
            else if (key == "grid.length_y") c.length_y = to_double(key, v);
            else if (key == "propagator.dt") c.dt = to_double(key, v);
            else if (key == "propagator.t_final_fs") c.t_final_fs = to_double(key, v);
            else if (key == "propagator.max_norm_drift") c.max_norm_drift = to_double(key, v);
            else if (key == "propagator.max_edge_density") c.max_edge_density = to_double(key, v);
            else if (key == "paths.radii") c.radii = to_list(key, v);
            else if (key == "paths.emf_radii") c.emf_radii = to_list(key, v);
            else if (key == "paths.n_points") c.n_points = to_count(key, v);
            else if (key == "paths.emf_points") c.emf_points = to_count(key, v);
            else if (key == "paths.emf_max_turn") c.emf_max_turn = to_double(key, v);
            else if (key == "paths.sampling") c.sampling = to_enum(key, v, sampling_names);
            else if (key == "paths.pole_delta") c.pole_delta = to_double(key, v);
            else if (key == "fields.epsilon_th") c.epsilon_th = to_double(key, v);
            else if (key == "fields.emf_form") c.emf_form = to_enum(key, v, form_names);
            else if (key == "cadence.phase_au") c.phase_au = to_double(key, v);
            else if (key == "cadence.emf_au") c.emf_au = to_double(key, v);
            else if (key == "cadence.fd_span_au") c.fd_span_au = to_double(key, v);
            else if (key == "cadence.observables_au") c.observables_au = to_double(key, v);
            else if (key == "cadence.snapshot_au") c.snapshot_au = to_double(key, v);
            else if (key == "cadence.checkpoint_au") c.checkpoint_au = to_double(key, v);
            else if (key == "output.directory") c.output_dir = trim(v);
            else throw ConfigError("unknown setting '" + key + "'");
        }
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file " + file.string());
    return parse_config(in);
}

}  // namespace geophase
