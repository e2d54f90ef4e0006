#include "wgflow/ensemble.hpp"

#include "wgflow/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace wgflow {

ParticleEnsemble::ParticleEnsemble(std::size_t count, std::size_t dim)
    : dim_(dim), positions_(count * dim, 0.0) {
    if (count == 0 || dim == 0) throw ParameterError("ensemble needs at least one particle and dimension >= 1");
}

ParticleEnsemble::ParticleEnsemble(std::size_t dim, std::vector<double> positions)
    : dim_(dim), positions_(std::move(positions)) {
    if (dim_ == 0 || positions_.empty()) {
        throw ParameterError("ensemble needs at least one particle and dimension >= 1");
    }
    if (positions_.size() % dim_ != 0) {
        throw ParameterError("position array length is not a multiple of the dimension");
    }
    if (!all_finite()) throw ParameterError("ensemble contains a non-finite coordinate");
}

bool ParticleEnsemble::all_finite() const noexcept {
    for (double v : positions_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double ParticleEnsemble::rms_radius() const noexcept {
    if (positions_.empty()) return 0.0;
    double acc = 0.0;
    for (double v : positions_) acc += v * v;
    return std::sqrt(acc / static_cast<double>(size()));
}

void require_comparable(const ParticleEnsemble& a, const ParticleEnsemble& b, const char* context) {
    if (!a.comparable(b)) {
        std::ostringstream msg;
        msg << context << ": ensembles are not comparable (N=" << a.size() << ", d=" << a.dim()
            << " vs N=" << b.size() << ", d=" << b.dim() << ")";
        throw ComparabilityError(msg.str());
    }
}

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, end);
}

void write_snapshot_csv(std::ostream& out, const ParticleEnsemble& e) {
    out << "particle_index";
    for (std::size_t k = 0; k < e.dim(); ++k) out << ",x" << k;
    out << '\n';
    for (std::size_t i = 0; i < e.size(); ++i) {
        out << i;
        for (double v : e.point(i)) out << ',' << format_double(v);
        out << '\n';
    }
}

void write_snapshot_csv(const std::string& path, const ParticleEnsemble& e) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open snapshot for writing: " + path);
    write_snapshot_csv(out, e);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        fields.push_back(field);
    }
    return fields;
}

double parse_field(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError("snapshot CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    return v;
}

}  // namespace

ParticleEnsemble read_snapshot_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("snapshot CSV is empty");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "particle_index") {
        throw ConfigError("snapshot CSV header must start with particle_index,x0");
    }
    const std::size_t dim = header.size() - 1;
    for (std::size_t k = 0; k < dim; ++k) {
        if (header[k + 1] != "x" + std::to_string(k)) throw ConfigError("snapshot CSV header column " + header[k + 1]);
    }
    std::vector<double> positions;
    std::size_t line_no = 1;
    std::size_t expected_index = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != dim + 1) {
            throw ConfigError("snapshot CSV line " + std::to_string(line_no) + ": expected " +
                              std::to_string(dim + 1) + " fields");
        }
        if (parse_field(fields[0], line_no) != static_cast<double>(expected_index)) {
            throw ConfigError("snapshot CSV line " + std::to_string(line_no) + ": particle index out of order");
        }
        ++expected_index;
        for (std::size_t k = 0; k < dim; ++k) positions.push_back(parse_field(fields[k + 1], line_no));
    }
    if (positions.empty()) throw ConfigError("snapshot CSV has no particles");
    try {
        return ParticleEnsemble(dim, std::move(positions));
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("snapshot CSV: ") + e.what());
    }
}

ParticleEnsemble read_snapshot_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open snapshot: " + path);
    return read_snapshot_csv(in);
}

}  // namespace wgflow
