#include "aggre/io.hpp"

#include "aggre/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace aggre {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& field, const std::string& source, std::size_t line, const char* what) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (field.empty() || ec != std::errc() || ptr != last) {
        throw ParseError(source, line, std::string("cannot parse ") + what + " value '" + field + "'");
    }
    if (!std::isfinite(v)) throw ParseError(source, line, std::string(what) + " is not finite");
    return v;
}

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

ObservationSet parse_observations_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    bool header_seen = false;
    std::vector<double> t, y;
    while (std::getline(in, raw)) {
        ++line;
        if (line == 1 && raw.size() >= 3 && raw.compare(0, 3, "\xEF\xBB\xBF") == 0) raw.erase(0, 3);
        const std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        const auto comma = s.find(',');
        if (comma == std::string::npos || s.find(',', comma + 1) != std::string::npos) {
            throw ParseError(source, line, "expected exactly two comma-separated fields");
        }
        const std::string a = trim(std::string_view(s).substr(0, comma));
        const std::string b = trim(std::string_view(s).substr(comma + 1));
        if (!header_seen) {
            if (a != "t" || b != "m") throw ParseError(source, line, "expected header 't,m'");
            header_seen = true;
            continue;
        }
        const double tv = parse_number(a, source, line, "t");
        const double mv = parse_number(b, source, line, "m");
        if (mv < 0.0) throw ParseError(source, line, "negative m");
        if (!t.empty() && !(tv > t.back())) throw ParseError(source, line, "t is not strictly increasing");
        t.push_back(tv);
        y.push_back(mv);
    }
    if (!header_seen) throw ParseError(source, line, "missing header 't,m'");
    return make_observations(std::move(t), std::move(y), IngestedProvenance{source});
}

ObservationSet load_observations_csv(const std::filesystem::path& path) {
    return parse_observations_csv(read_file(path), path.string());
}

std::string format_observations_csv(const ObservationSet& obs) {
    std::string out = "t,m\n";
    for (std::size_t k = 0; k < obs.size(); ++k) out += number(obs.t[k]) + "," + number(obs.y[k]) + "\n";
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error while reading " + path.string());
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.close();
    if (!out) throw IoError("error while writing " + path.string());
}

std::string format_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + number(row[i]);
        out += "\n";
    }
    return out;
}

std::string format_trajectory_csv(const Trajectory& traj) {
    std::vector<std::vector<double>> rows;
    rows.reserve(traj.points.size());
    for (const auto& p : traj.points) rows.push_back({p.t, p.m, p.V, p.V_star});
    return format_table({"t", "m", "V", "V_star"}, rows);
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string data_hash(const ObservationSet& obs) { return fnv1a_hex(format_observations_csv(obs)); }

} // namespace aggre
