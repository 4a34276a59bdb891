// Scenario runner: parse a declarative config (TOML-style key/value or JSON),
// assemble family + Hamiltonian + task, execute, and emit machine-readable
// results plus gnuplot scripts.
//
// Verbs: evolve, imaginary, spectrum, spectral-function, certify, verify.
// Exit codes: 0 ok, 2 config error, 3 numerical error.

#include <varkahler/coherent_group.hpp>
#include <varkahler/evolution.hpp>
#include <varkahler/exact_hilbert.hpp>
#include <varkahler/families.hpp>
#include <varkahler/gaussian.hpp>
#include <varkahler/spectra.hpp>

#include "../tests/acceptance_criteria.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using json = nlohmann::json;
using namespace varkahler;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- logging --------------------------------------------------------------

int log_level() {  // 0 quiet, 1 info, 2 debug
    const char* env = std::getenv("VARKAHLER_LOG");
    if (!env) return 1;
    std::string v = env;
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[varkahler] " << msg << "\n";
}
void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[varkahler:debug] " << msg << "\n";
}

// ---- TOML-subset parser ---------------------------------------------------
//
// Supported: [section] headers, key = value with strings, booleans, numbers
// and (nested) one-line arrays.  Comments start with '#'.  The result is a
// two-level JSON object; line numbers are kept for diagnostics.

struct ParsedConfig {
    json data = json::object();
    std::map<std::string, int> lines;  // "section.key" -> line number
};

json parse_toml_value(const std::string& s, size_t& pos, int line) {
    auto skip = [&] { while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos; };
    skip();
    if (pos >= s.size())
        throw ConfigError("line " + std::to_string(line) + ": missing value");
    char c = s[pos];
    if (c == '"') {
        size_t end = s.find('"', pos + 1);
        if (end == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": unterminated string");
        std::string v = s.substr(pos + 1, end - pos - 1);
        pos = end + 1;
        return v;
    }
    if (c == '[') {
        ++pos;
        json arr = json::array();
        skip();
        if (pos < s.size() && s[pos] == ']') {
            ++pos;
            return arr;
        }
        while (true) {
            arr.push_back(parse_toml_value(s, pos, line));
            skip();
            if (pos < s.size() && s[pos] == ',') {
                ++pos;
                continue;
            }
            if (pos < s.size() && s[pos] == ']') {
                ++pos;
                return arr;
            }
            throw ConfigError("line " + std::to_string(line) + ": malformed array");
        }
    }
    // bareword: boolean or number
    size_t end = pos;
    while (end < s.size() && std::string(",]").find(s[end]) == std::string::npos &&
           !std::isspace((unsigned char)s[end]))
        ++end;
    std::string tok = s.substr(pos, end - pos);
    pos = end;
    if (tok == "true") return true;
    if (tok == "false") return false;
    try {
        size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": cannot parse value '" + tok + "'");
    }
}

ParsedConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    ParsedConfig out;
    size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            out.data = json::parse(text);
        } catch (const json::exception& e) {
            throw ConfigError("JSON parse error in " + path + ": " + e.what());
        }
        return out;
    }

    std::istringstream ls(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ls, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        size_t b = line.find_last_not_of(" \t\r");
        line = line.substr(a, b - a + 1);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = line.substr(1, line.size() - 2);
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            if (!out.data.contains(section)) out.data[section] = json::object();
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        if (key.empty() || section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside a [section]");
        std::string rest = line.substr(eq + 1);
        size_t pos = 0;
        json v = parse_toml_value(rest, pos, lineno);
        while (pos < rest.size() && std::isspace((unsigned char)rest[pos])) ++pos;
        if (pos != rest.size())
            throw ConfigError("line " + std::to_string(lineno) + ": trailing characters");
        out.data[section][key] = v;
        out.lines[section + "." + key] = lineno;
    }
    return out;
}

// ---- schema ---------------------------------------------------------------

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"family", {"preset", "cutoff", "r", "theta", "x0"}},
        {"hamiltonian", {"pauli", "matrix", "matrix_imag", "quadratic_h", "linear_f"}},
        {"task",
         {"T", "dt", "principle", "record_stride", "track_phase", "eta", "omega_min", "omega_max",
          "omega_points", "probe_linear", "probe_quadratic", "probe_matrix"}},
        {"output", {"dir", "format"}},
    };
    return s;
}

void validate_schema(const ParsedConfig& cfg) {
    for (auto& [section, body] : cfg.data.items()) {
        auto it = schema().find(section);
        if (it == schema().end())
            throw ConfigError("unknown config section [" + section + "]");
        if (!body.is_object())
            throw ConfigError("section [" + section + "] must hold key = value entries");
        for (auto& [key, val] : body.items()) {
            (void)val;
            if (!it->second.count(key)) {
                auto ln = cfg.lines.find(section + "." + key);
                std::string where =
                    ln == cfg.lines.end() ? "" : " (line " + std::to_string(ln->second) + ")";
                throw ConfigError("unknown key '" + key + "' in [" + section + "]" + where);
            }
        }
    }
}

// ---- typed readers --------------------------------------------------------

double get_num(const json& sec, const std::string& key, std::optional<double> def = {}) {
    if (!sec.contains(key)) {
        if (def) return *def;
        throw ConfigError("missing required key '" + key + "'");
    }
    if (!sec[key].is_number()) throw ConfigError("key '" + key + "' must be a number");
    return sec[key].get<double>();
}

std::string get_str(const json& sec, const std::string& key, std::optional<std::string> def = {}) {
    if (!sec.contains(key)) {
        if (def) return *def;
        throw ConfigError("missing required key '" + key + "'");
    }
    if (!sec[key].is_string()) throw ConfigError("key '" + key + "' must be a string");
    return sec[key].get<std::string>();
}

Vec get_vec(const json& sec, const std::string& key) {
    const json& a = sec.at(key);
    if (!a.is_array()) throw ConfigError("key '" + key + "' must be an array of numbers");
    Vec v(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number()) throw ConfigError("key '" + key + "' must be numeric");
        v[(Eigen::Index)i] = a[i].get<double>();
    }
    return v;
}

Mat get_mat(const json& sec, const std::string& key) {
    const json& a = sec.at(key);
    if (!a.is_array() || a.empty() || !a[0].is_array())
        throw ConfigError("key '" + key + "' must be an array of rows");
    Mat m(a.size(), a[0].size());
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != a[0].size())
            throw ConfigError("key '" + key + "': ragged rows");
        for (size_t j = 0; j < a[i].size(); ++j) m((Eigen::Index)i, (Eigen::Index)j) = a[i][j].get<double>();
    }
    return m;
}

// ---- scenario assembly ----------------------------------------------------

struct Assembly {
    // exact-Hilbert path
    FamilySpec family;
    CMat hamiltonian;
    Vec x0;
    std::shared_ptr<FockSpaceBuilder> fb;  // present for Fock-space families

    // analytic Gaussian path (spectrum / spectral-function)
    bool gaussian = false;
    GaussianState gstate{Statistics::Boson, Mat(), Vec()};
    Mat h_quad;
    Vec f_lin;
    int cutoff = 16;

    // coherent-group path (certify)
    std::optional<CoherentPreset> preset;
    std::optional<CoherentFamily> coherent;
};

CMat build_hamiltonian(const json& sec, Eigen::Index dim,
                       const std::shared_ptr<FockSpaceBuilder>& fb) {
    if (sec.contains("pauli")) {
        Vec c = get_vec(sec, "pauli");
        if (c.size() != 4 || dim != 2)
            throw ConfigError("'pauli' needs 4 coefficients and a dim-2 family");
        return c[0] * CMat::Identity(2, 2) + c[1] * pauli_x() + c[2] * pauli_y() + c[3] * pauli_z();
    }
    if (sec.contains("quadratic_h")) {
        if (!fb) throw ConfigError("'quadratic_h' needs a Fock-space family");
        Mat h = get_mat(sec, "quadratic_h");
        if (h.rows() != h.cols() || h.rows() != 2 * fb->n_bosons())
            throw ConfigError("'quadratic_h' must be 2N x 2N for the family's mode count");
        Vec f;
        if (sec.contains("linear_f")) f = get_vec(sec, "linear_f");
        return quadratic_boson_operator(*fb, h, f);
    }
    if (sec.contains("matrix")) {
        Mat re = get_mat(sec, "matrix");
        if (re.rows() != dim || re.cols() != dim)
            throw ConfigError("'matrix' dimension does not match the family");
        CMat H = re.cast<cplx>();
        if (sec.contains("matrix_imag")) {
            Mat im = get_mat(sec, "matrix_imag");
            if (im.rows() != dim || im.cols() != dim)
                throw ConfigError("'matrix_imag' dimension does not match the family");
            H += cplx(0, 1) * im.cast<cplx>();
        }
        double scale = std::max(H.cwiseAbs().maxCoeff(), 1.0);
        if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
            throw ConfigError("'matrix' (+ 'matrix_imag') must be Hermitian");
        return H;
    }
    throw ConfigError("[hamiltonian] needs one of: pauli, matrix, quadratic_h");
}

Assembly assemble(const json& cfg, bool need_hamiltonian) {
    if (!cfg.contains("family")) throw ConfigError("missing [family] section");
    const json& fam = cfg["family"];
    std::string preset = get_str(fam, "preset");
    Assembly out;
    out.cutoff = (int)get_num(fam, "cutoff", 16.0);
    if (out.cutoff < 2 || out.cutoff > 64) throw ConfigError("'cutoff' out of range [2, 64]");

    if (preset == "bloch" || preset == "equator" || preset == "two_qubit_product") {
        out.family = (preset == "bloch")     ? bloch_family()
                     : (preset == "equator") ? equator_family()
                                             : two_qubit_product_family();
    } else if (preset == "example9" || preset == "tilde_coherent") {
        double r = get_num(fam, "r", 0.0);
        out.family = (preset == "example9") ? example9_family(r, out.cutoff)
                                            : tilde_coherent_family(r, out.cutoff);
        out.fb = std::make_shared<FockSpaceBuilder>(2, out.cutoff);
    } else if (preset.rfind("gaussian:boson", 0) == 0) {
        int modes = std::stoi(preset.substr(14));
        if (modes < 1 || modes > 3) throw ConfigError("gaussian preset supports 1..3 modes");
        out.gaussian = true;
        out.gstate = vacuum_state(Statistics::Boson, modes);
        out.fb = std::make_shared<FockSpaceBuilder>(modes, out.cutoff);
        if (need_hamiltonian) {
            if (!cfg.contains("hamiltonian") || !cfg["hamiltonian"].contains("quadratic_h"))
                throw ConfigError("gaussian scenarios need [hamiltonian] quadratic_h");
            out.h_quad = get_mat(cfg["hamiltonian"], "quadratic_h");
            if (out.h_quad.rows() != 2 * modes || out.h_quad.cols() != 2 * modes)
                throw ConfigError("'quadratic_h' must be 2N x 2N");
            if (cfg["hamiltonian"].contains("linear_f"))
                out.f_lin = get_vec(cfg["hamiltonian"], "linear_f");
        }
        return out;
    } else if (preset.find(':') != std::string::npos || preset == "so3:vector") {
        CoherentPreset p = coherent_preset(preset);  // throws invalid_argument on bad names
        if (preset == "so3:vector" && fam.contains("theta")) {
            double th = get_num(fam, "theta");
            CVec v(3);
            v << std::cos(th), cplx(0, 1) * std::sin(th), 0.0;
            p.phi = v;
        }
        out.preset = p;
        out.coherent = coherent_family(p.algebra, p.phi);
        std::vector<CMat> gens = p.algebra.generators;
        out.family = group_orbit_family(preset, gens, p.phi);
    } else {
        throw ConfigError("unknown family preset '" + preset + "'");
    }

    out.x0 = fam.contains("x0") ? get_vec(fam, "x0") : Vec(Vec::Zero(out.family.dimension));
    if (out.x0.size() != out.family.dimension)
        throw ConfigError("'x0' must have " + std::to_string(out.family.dimension) + " entries");
    Eigen::Index dim = out.family.parametrize(out.x0).size();

    if (need_hamiltonian) {
        if (!cfg.contains("hamiltonian")) throw ConfigError("missing [hamiltonian] section");
        out.hamiltonian = build_hamiltonian(cfg["hamiltonian"], dim, out.fb);
    }
    return out;
}

// ---- output helpers -------------------------------------------------------

struct OutputSink {
    std::string dir = ".";
    std::string format = "csv";  // csv | json
    json meta = json::object();

    std::string path(const std::string& name) const { return dir + "/" + name; }

    void write_text(const std::string& name, const std::string& body) const {
        std::ofstream f(path(name));
        if (!f) throw std::runtime_error("cannot write " + path(name));
        f << body;
    }
    void write_json(const std::string& name, const json& j) const {
        write_text(name, j.dump(2) + "\n");
    }
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_trajectory(const OutputSink& sink, const Trajectory& tr, const FamilySpec& f,
                      bool phase) {
    std::vector<std::string> cols = {"t"};
    for (int i = 0; i < f.dimension; ++i) cols.push_back("x" + std::to_string(i + 1));
    cols.push_back("E");
    if (phase) {
        cols.push_back("kappa");
        cols.push_back("varphi");
    }
    for (auto& [name, v] : tr.tracked) {
        (void)v;
        cols.push_back(name);
    }
    if (sink.format == "json") {
        json j;
        j["columns"] = cols;
        json rows = json::array();
        for (size_t k = 0; k < tr.times.size(); ++k) {
            json row = json::array();
            row.push_back(tr.times[k]);
            for (int i = 0; i < f.dimension; ++i) row.push_back(tr.params[k][i]);
            row.push_back(tr.energy[k]);
            if (phase) {
                row.push_back(tr.phase[k].kappa);
                row.push_back(tr.phase[k].varphi);
            }
            for (auto& [name, v] : tr.tracked) {
                (void)name;
                row.push_back(v[k]);
            }
            rows.push_back(row);
        }
        j["rows"] = rows;
        sink.write_json("trajectory.json", j);
        return;
    }
    std::ostringstream os;
    os << "# ";
    for (size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    for (size_t k = 0; k < tr.times.size(); ++k) {
        os << num(tr.times[k]);
        for (int i = 0; i < f.dimension; ++i) os << "," << num(tr.params[k][i]);
        os << "," << num(tr.energy[k]);
        if (phase) os << "," << num(tr.phase[k].kappa) << "," << num(tr.phase[k].varphi);
        for (auto& [name, v] : tr.tracked) {
            (void)name;
            os << "," << num(v[k]);
        }
        os << "\n";
    }
    sink.write_text("trajectory.csv", os.str());
    std::ostringstream plt;
    plt << "# gnuplot script for the recorded trajectory\n"
        << "set datafile separator ','\n"
        << "set xlabel 't'\n"
        << "plot ";
    for (int i = 0; i < f.dimension; ++i)
        plt << (i ? ", " : "") << "'trajectory.csv' using 1:" << (i + 2) << " with lines title 'x"
            << (i + 1) << "'";
    plt << ", 'trajectory.csv' using 1:" << (f.dimension + 2) << " with lines title 'E'\n";
    sink.write_text("trajectory.plt", plt.str());
}

// ---- verbs ----------------------------------------------------------------

int run_flow(const json& cfg, OutputSink& sink, FlowKind default_kind, bool imaginary) {
    Assembly as = assemble(cfg, true);
    if (as.gaussian)
        throw ConfigError("real/imaginary-time scenarios need a wavefunction family preset");
    if (!cfg.contains("task")) throw ConfigError("missing [task] section");
    const json& task = cfg["task"];
    if (task.empty()) throw ConfigError("[task] section is empty");
    double T = get_num(task, "T");
    double dt = get_num(task, "dt");
    if (T <= 0 || dt <= 0) throw ConfigError("'T' and 'dt' must be positive");
    FlowKind kind = default_kind;
    if (!imaginary && task.contains("principle")) {
        std::string p = get_str(task, "principle");
        if (p == "lagrangian") kind = FlowKind::Lagrangian;
        else if (p == "mclachlan") kind = FlowKind::McLachlan;
        else throw ConfigError("'principle' must be lagrangian or mclachlan");
    }
    IntegrateOptions opt;
    opt.track_phase = !task.contains("track_phase") || task["track_phase"].get<bool>();
    opt.record_stride = (int)get_num(task, "record_stride", 1.0);
    if (opt.record_stride < 1) throw ConfigError("'record_stride' must be >= 1");

    log_info("integrating " + as.family.label + " for T = " + num(T) + ", dt = " + num(dt));
    Trajectory tr = integrate(make_field(kind, as.hamiltonian), as.family, as.x0, as.hamiltonian,
                              T, dt, opt);
    if (imaginary) {
        for (size_t i = 1; i < tr.energy.size(); ++i)
            if (tr.energy[i] > tr.energy[i - 1] + 1e-10)
                throw std::runtime_error("imaginary-time energy increased between records");
    }
    write_trajectory(sink, tr, as.family, opt.track_phase);
    sink.meta["tolerances"]["T"] = T;
    sink.meta["tolerances"]["dt"] = dt;
    sink.meta["tolerances"]["record_stride"] = opt.record_stride;
    sink.meta["final_energy"] = tr.energy.back();
    log_info("final energy " + num(tr.energy.back()));
    return 0;
}

LinearizationResult gaussian_linearization(Assembly& as, Mat* omega_out = nullptr,
                                           FamilySpec* bridge_out = nullptr, int* dim_out = nullptr) {
    auto basis = gaussian_tangent_basis(as.gstate);
    PolynomialOperator op = quadratic_hamiltonian(as.h_quad, as.f_lin);
    Mat K = linearize_gaussian(as.gstate, op, basis, &as.h_quad);
    FamilySpec bridge = gaussian_family(as.gstate, basis, as.cutoff);
    int dim = (int)(basis.z_basis.size() + basis.gamma_basis.size());
    KahlerTriple t = restricted_structures(tangent_frame(bridge, Vec::Zero(dim)));
    if (omega_out) *omega_out = t.omega;
    if (bridge_out) *bridge_out = bridge;
    if (dim_out) *dim_out = dim;
    return analyze_k_matrix(K, t.omega, t.g, &t.j, false);
}

json spectrum_json(const LinearizationResult& lin) {
    json j;
    json freqs = json::array(), eigs = json::array();
    for (const auto& p : lin.eigenpairs) {
        eigs.push_back({p.lambda.real(), p.lambda.imag()});
        if (p.lambda.imag() > 0) freqs.push_back(p.lambda.imag());
    }
    std::sort(freqs.begin(), freqs.end());
    j["frequencies"] = freqs;
    j["eigenvalues"] = eigs;
    j["zero_modes"] = lin.zero_modes.size();
    j["williamson_normalized"] = lin.normalized;
    return j;
}

int run_spectrum(const json& cfg, OutputSink& sink) {
    Assembly as = assemble(cfg, true);
    LinearizationResult lin;
    if (as.gaussian) {
        log_info("analytic Gaussian linearization, " + std::to_string(as.gstate.modes()) +
                 " mode(s)");
        lin = gaussian_linearization(as);
    } else {
        log_info("finite-difference linearization of " + as.family.label);
        lin = linearize(as.family, as.x0, as.hamiltonian);
    }
    sink.write_json("spectrum.json", spectrum_json(lin));
    sink.meta["tolerances"]["stationarity_rtol"] = stationarity_rtol;
    sink.meta["tolerances"]["rank_rtol"] = rank_rtol;
    return 0;
}

int run_spectral_function(const json& cfg, OutputSink& sink) {
    Assembly as = assemble(cfg, true);
    if (!cfg.contains("task")) throw ConfigError("missing [task] section");
    const json& task = cfg["task"];
    if (task.empty()) throw ConfigError("[task] section is empty");
    double eta = get_num(task, "eta", 0.05);
    if (eta <= 0) throw ConfigError("'eta' must be positive");

    LinearizationResult lin;
    FamilySpec fam;
    Vec x0;
    CMat probe;
    if (as.gaussian) {
        int dim = 0;
        lin = gaussian_linearization(as, nullptr, &fam, &dim);
        x0 = Vec::Zero(dim);
        auto xi = as.fb->xi_bosonic();
        probe = CMat::Zero(as.fb->dim(), as.fb->dim());
        bool have = false;
        if (task.contains("probe_linear")) {
            Vec c = get_vec(task, "probe_linear");
            if (c.size() != (Eigen::Index)xi.size())
                throw ConfigError("'probe_linear' needs one coefficient per quadrature");
            for (size_t a = 0; a < xi.size(); ++a) probe += c[(Eigen::Index)a] * xi[a];
            have = true;
        }
        if (task.contains("probe_quadratic")) {
            Mat q = get_mat(task, "probe_quadratic");
            if (q.rows() != (Eigen::Index)xi.size() || q.cols() != (Eigen::Index)xi.size())
                throw ConfigError("'probe_quadratic' must be 2N x 2N");
            probe += quadratic_boson_operator(*as.fb, Mat(0.5 * (q + q.transpose())));
            have = true;
        }
        if (!have) throw ConfigError("spectral-function needs probe_linear or probe_quadratic");
    } else {
        lin = linearize(as.family, as.x0, as.hamiltonian);
        fam = as.family;
        x0 = as.x0;
        if (!task.contains("probe_matrix"))
            throw ConfigError("spectral-function on a wavefunction family needs probe_matrix");
        Mat re = get_mat(task, "probe_matrix");
        probe = re.cast<cplx>();
    }
    double wmax_default = 1.0;
    for (const auto& p : lin.eigenpairs) wmax_default = std::max(wmax_default, p.lambda.imag());
    double w0 = get_num(task, "omega_min", 0.0);
    double w1 = get_num(task, "omega_max", 1.5 * wmax_default);
    int npts = (int)get_num(task, "omega_points", 121.0);
    if (npts < 2 || w1 <= w0) throw ConfigError("malformed omega grid");
    Vec grid = Vec::LinSpaced(npts, w0, w1);

    SpectralResult sp = spectral_function(lin, fam, x0, probe, grid, eta);
    if (sink.format == "json") {
        json j = spectrum_json(lin);
        j["eta"] = sp.eta;
        j["peak_omegas"] = sp.omegas;
        j["peak_weights"] = sp.weights;
        j["grid"] = std::vector<double>(sp.grid.data(), sp.grid.data() + sp.grid.size());
        j["a_values"] =
            std::vector<double>(sp.a_values.data(), sp.a_values.data() + sp.a_values.size());
        sink.write_json("spectral_function.json", j);
    } else {
        std::ostringstream os;
        os << "# omega,A\n";
        for (int i = 0; i < grid.size(); ++i)
            os << num(grid[i]) << "," << num(sp.a_values[i]) << "\n";
        sink.write_text("spectral_function.csv", os.str());
        sink.write_text("spectral_function.plt",
                        "# gnuplot script for the spectral function\n"
                        "set datafile separator ','\n"
                        "set xlabel 'omega'\nset ylabel 'A(omega)'\n"
                        "plot 'spectral_function.csv' using 1:2 with lines notitle\n");
    }
    sink.write_json("spectrum.json", spectrum_json(lin));
    sink.meta["tolerances"]["eta"] = sp.eta;
    sink.meta["tolerances"]["stationarity_rtol"] = stationarity_rtol;
    return 0;
}

int run_certify(const json& cfg, OutputSink& sink) {
    Assembly as = assemble(cfg, false);
    if (!as.preset || !as.coherent)
        throw ConfigError("certify needs a coherent-group family preset (e.g. su2:spin-1)");
    HighestWeightCertificate cert = certify_highest_weight(*as.coherent, as.preset->cartan);
    json j;
    j["preset"] = as.preset->name;
    j["kaehler"] = cert.kaehler;
    j["annihilation_residual"] = cert.annihilation_residual;
    j["classification"] = to_string(cert.classification);
    if (cert.witness) {
        j["witness_c"] = cert.witness_c;
        j["witness"] = {std::vector<double>(cert.witness->first.data(),
                                            cert.witness->first.data() + cert.witness->first.size()),
                        std::vector<double>(cert.witness->second.data(),
                                            cert.witness->second.data() + cert.witness->second.size())};
    }
    sink.write_json("certificate.json", j);
    std::cout << (cert.kaehler ? "certified Kaehler" : "not a Kaehler orbit") << " ("
              << to_string(cert.classification)
              << ", annihilation residual " << num(cert.annihilation_residual) << ")\n";
    return 0;
}

int run_verify(const std::string& suite) {
    static const std::map<std::string, std::vector<int>> suites = {
        {"paper-examples", {}},  // empty = every criterion
        {"kahler-core", {1, 2, 11}},
        {"evolution", {3, 4, 9}},
        {"spectra", {5, 6}},
        {"gaussian", {7, 8}},
        {"groups", {10}},
    };
    auto it = suites.find(suite);
    if (it == suites.end()) throw ConfigError("unknown verify suite '" + suite + "'");
    int failures = acceptance::run(it->second);
    return failures == 0 ? 0 : 3;
}

// ---- tol-override plumbing ------------------------------------------------

void apply_overrides(json& cfg, const std::vector<std::string>& overrides) {
    static const std::set<std::string> allowed = {"T",         "dt",          "eta",
                                                  "omega_min", "omega_max",   "omega_points",
                                                  "record_stride"};
    for (const std::string& ov : overrides) {
        size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--tol-override expects key=value, got '" + ov + "'");
        std::string key = ov.substr(0, eq), val = ov.substr(eq + 1);
        if (!allowed.count(key))
            throw ConfigError("--tol-override: unknown tolerance knob '" + key + "'");
        try {
            cfg["task"][key] = std::stod(val);
        } catch (...) {
            throw ConfigError("--tol-override: cannot parse value '" + val + "'");
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variational quantum dynamics on restricted Kaehler structures"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", format = "csv", suite = "paper-examples";
    unsigned long long seed = 0;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "scenario config file (TOML-style or JSON)");
    app.add_option("--out", out_dir, "output directory (default: current)");
    app.add_option("--format", format, "output format: csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", seed, "RNG seed recorded in meta.json");
    app.add_option("--tol-override", overrides, "override a tolerance knob, key=value")
        ->take_all();

    auto* c_evolve = app.add_subcommand("evolve", "real-time projected evolution");
    auto* c_imag = app.add_subcommand("imaginary", "imaginary-time descent");
    auto* c_spec = app.add_subcommand("spectrum", "linearized excitation spectrum");
    auto* c_sfun = app.add_subcommand("spectral-function", "linear-response spectral function");
    auto* c_cert = app.add_subcommand("certify", "highest-weight / Kaehler certification");
    auto* c_verify = app.add_subcommand("verify", "run the built-in acceptance checks");
    c_verify->add_option("suite", suite, "paper-examples | kahler-core | evolution | spectra | gaussian | groups");
    for (CLI::App* sub : {c_evolve, c_imag, c_spec, c_sfun, c_cert, c_verify})
        sub->fallthrough();  // let the shared --config/--out/... follow the verb

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    auto t0 = std::chrono::steady_clock::now();
    try {
        if (c_verify->parsed()) {
            return run_verify(suite);
        }
        if (config_path.empty()) throw ConfigError("--config is required for this verb");
        ParsedConfig parsed = parse_config_file(config_path);
        validate_schema(parsed);
        json cfg = parsed.data;
        apply_overrides(cfg, overrides);

        OutputSink sink;
        sink.dir = out_dir;
        sink.format = format;
        if (cfg.contains("output")) {
            if (cfg["output"].contains("dir") && out_dir == ".")
                sink.dir = get_str(cfg["output"], "dir");
            if (cfg["output"].contains("format") && format == "csv")
                sink.format = get_str(cfg["output"], "format");
            if (sink.format != "csv" && sink.format != "json")
                throw ConfigError("output format must be csv or json");
        }
        sink.meta["tool"] = "varkahler";
        sink.meta["version"] = "0.1.0";
        sink.meta["config"] = config_path;
        sink.meta["seed"] = seed;
        sink.meta["format"] = sink.format;
        sink.meta["tolerances"] = json::object();

        int rc = 0;
        if (c_evolve->parsed()) {
            sink.meta["verb"] = "evolve";
            rc = run_flow(cfg, sink, FlowKind::Lagrangian, false);
        } else if (c_imag->parsed()) {
            sink.meta["verb"] = "imaginary";
            rc = run_flow(cfg, sink, FlowKind::ImaginaryTime, true);
        } else if (c_spec->parsed()) {
            sink.meta["verb"] = "spectrum";
            rc = run_spectrum(cfg, sink);
        } else if (c_sfun->parsed()) {
            sink.meta["verb"] = "spectral-function";
            rc = run_spectral_function(cfg, sink);
        } else if (c_cert->parsed()) {
            sink.meta["verb"] = "certify";
            rc = run_certify(cfg, sink);
        }
        sink.meta["wall_time_s"] = std::chrono::duration<double>(
                                       std::chrono::steady_clock::now() - t0)
                                       .count();
        sink.write_json("meta.json", sink.meta);
        log_debug("meta.json written to " + sink.dir);
        return rc;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
}
