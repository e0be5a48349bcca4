#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "evolution.hpp"
#include "grassmann.hpp"
#include "stability.hpp"
#include "toeplitz.hpp"

namespace hwm {

inline constexpr const char* version_string = "hwm-lab 0.1";

// FNV-1a, 64 bit
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

inline std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// temp file + rename; the rename is atomic on POSIX filesystems
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("io", "cannot open " + tmp.string());
        f << content;
        f.flush();
        if (!f) throw Error("io", "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("io", "rename to " + path.string() + " failed: " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// ---- loop serialization ----

inline nlohmann::json loop_to_json(const GrassmannLoop& L, const std::string& config_hash = {}) {
    nlohmann::json j;
    j["d"] = L.d;
    j["k"] = L.k;
    j["N"] = L.series.N();
    nlohmann::json c = nlohmann::json::array();
    for (int n = -L.series.N(); n <= L.series.N(); ++n)
        for (int a = 0; a < L.d; ++a)
            for (int b = 0; b < L.d; ++b) c.push_back({L.series[n](a, b).real(), L.series[n](a, b).imag()});
    j["coeffs"] = std::move(c);
    if (!config_hash.empty()) j["config_hash"] = config_hash;
    return j;
}

inline GrassmannLoop loop_from_json(const nlohmann::json& j) {
    try {
        const int d = j.at("d").get<int>();
        const int k = j.at("k").get<int>();
        const int N = j.at("N").get<int>();
        const auto& c = j.at("coeffs");
        if (d < 1 || N < 0 || k < 0 || k > d) throw ConfigError("loop json: bad d, k or N");
        if (!c.is_array() || c.size() != static_cast<std::size_t>((2 * N + 1) * d * d))
            throw ConfigError("loop json: coeffs must hold (2N+1) d^2 entries");
        FourierSeries U(d, N);
        std::size_t i = 0;
        for (int n = -N; n <= N; ++n)
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b, ++i) {
                    const auto& e = c[i];
                    if (!e.is_array() || e.size() != 2) throw ConfigError("loop json: entry is not [re, im]");
                    U[n](a, b) = cplx(e[0].get<double>(), e[1].get<double>());
                }
        return make_loop(std::move(U), k);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("loop json: ") + e.what());
    }
}

inline std::string dump_loop(const GrassmannLoop& L, const std::string& config_hash = {}) {
    return loop_to_json(L, config_hash).dump(1) + "\n";
}

inline GrassmannLoop parse_loop(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("loop json: ") + e.what());
    }
    return loop_from_json(j);
}

inline nlohmann::json spectral_to_json(const SpectralData& s, const std::string& config_hash = {}) {
    nlohmann::json j;
    j["eigenvalues"] = std::vector<double>(s.eigenvalues.data(), s.eigenvalues.data() + s.eigenvalues.size());
    j["near_edge_count"] = s.near_edge_count;
    j["residuals"] = {{"max_eigen_residual", s.max_residual}, {"orthonormality", s.orthonormality}};
    if (!config_hash.empty()) j["config_hash"] = config_hash;
    return j;
}

// ---- CSV ----

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add(std::vector<std::string> row) {
        if (row.size() != header_.size()) throw DomainError("csv row width mismatch");
        rows_.push_back(std::move(row));
    }

    std::size_t rows() const { return rows_.size(); }

    std::string str(const std::string& config_hash) const {
        std::string out = std::string("# ") + version_string + " config_hash=" + config_hash + "\n";
        out += join(header_);
        for (const auto& r : rows_) out += join(r);
        return out;
    }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ',';
            s += v[i];
        }
        return s + "\n";
    }
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

inline std::vector<std::string> trajectory_header(int d) {
    std::vector<std::string> h{"t", "energy"};
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            h.push_back("mean_" + std::to_string(a) + std::to_string(b) + "_re");
            h.push_back("mean_" + std::to_string(a) + std::to_string(b) + "_im");
        }
    for (const char* s : {"constraint_residual", "spectral_radius", "n_modes_used"}) h.emplace_back(s);
    return h;
}

inline std::vector<std::string> trajectory_row(double t, double energy, const Mat& mean, double constraint, double radius, int n_modes) {
    std::vector<std::string> r{fmt_double(t), fmt_double(energy)};
    for (Eigen::Index a = 0; a < mean.rows(); ++a)
        for (Eigen::Index b = 0; b < mean.cols(); ++b) {
            r.push_back(fmt_double(mean(a, b).real()));
            r.push_back(fmt_double(mean(a, b).imag()));
        }
    r.push_back(fmt_double(constraint));
    r.push_back(fmt_double(radius));
    r.push_back(std::to_string(n_modes));
    return r;
}

inline std::vector<std::string> norm_curve_header() { return {"t", "N", "norm", "deficit", "verdict"}; }

inline std::vector<std::string> norm_curve_row(const NormCurveRow& r) {
    return {fmt_double(r.t), std::to_string(r.N), fmt_double(r.norm), fmt_double(r.deficit), to_string(r.verdict)};
}

// ---- flat key=value config ----

class KeyValueConfig {
public:
    // known: key -> default value
    explicit KeyValueConfig(std::map<std::string, std::string> known) : values_(std::move(known)) {}

    void parse(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    void set(const std::string& key, const std::string& value) {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
        it->second = value;
        explicit_.insert(key);
    }

    bool given(const std::string& key) const { return explicit_.count(key) > 0; }

    const std::string& str(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
        return it->second;
    }

    long long integer(const std::string& key) const {
        const auto& s = str(key);
        long long v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("key '" + key + "' expects an integer, got '" + s + "'");
        return v;
    }

    std::uint64_t unsigned64(const std::string& key) const {
        const auto& s = str(key);
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("key '" + key + "' expects an unsigned integer, got '" + s + "'");
        return v;
    }

    double real(const std::string& key) const {
        const auto& s = str(key);
        try {
            std::size_t pos = 0;
            double v = std::stod(s, &pos);
            if (pos != s.size()) throw ConfigError("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' expects a number, got '" + s + "'");
        }
    }

    std::vector<double> reals(const std::string& key) const {
        std::vector<double> out;
        for (const auto& part : split(str(key), ',')) {
            try {
                std::size_t pos = 0;
                out.push_back(std::stod(part, &pos));
                if (pos != part.size()) throw ConfigError("");
            } catch (const std::exception&) {
                throw ConfigError("key '" + key + "' expects a comma-separated list of numbers");
            }
        }
        return out;
    }

    // "re:im,re:im"
    std::vector<cplx> complexes(const std::string& key) const {
        std::vector<cplx> out;
        const auto number = [](const std::string& s) {
            std::size_t pos = 0;
            double v = std::stod(s, &pos);
            if (pos != s.size()) throw ConfigError("");
            return v;
        };
        for (const auto& part : split(str(key), ',')) {
            auto c = part.find(':');
            try {
                if (c == std::string::npos) out.emplace_back(number(part), 0.0);
                else out.emplace_back(number(part.substr(0, c)), number(part.substr(c + 1)));
            } catch (const std::exception&) {
                throw ConfigError("key '" + key + "' expects re:im pairs");
            }
        }
        return out;
    }

    // sorted key=value lines, the input to the config hash
    std::string canonical() const {
        std::string s;
        for (const auto& [k, v] : values_) s += k + "=" + v + "\n";
        return s;
    }

    std::string hash() const { return hex64(fnv1a(canonical())); }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }
    static std::vector<std::string> split(const std::string& s, char sep) {
        std::vector<std::string> out;
        if (trim(s).empty()) return out;
        std::string cur;
        std::istringstream in(s);
        while (std::getline(in, cur, sep)) out.push_back(trim(cur));
        return out;
    }

    std::map<std::string, std::string> values_;
    std::set<std::string> explicit_;
};

} // namespace hwm
