#include "geophase/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace geophase {

namespace fs = std::filesystem;

namespace {

fs::path with_suffix(const fs::path& stem, const char* suffix) {
    fs::path p = stem;
    p += suffix;
    return p;
}

void put_double(std::ostream& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
}

double get_double(std::istream& in) {
    char buf[8];
    in.read(buf, 8);
    if (!in) throw std::runtime_error("snapshot: truncated binary file");
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    return std::bit_cast<double>(bits);
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void write_header(const fs::path& stem, const std::string& kind, const Grid2D& grid,
                  double time_au, int components,
                  const std::map<std::string, std::string>& extra) {
    std::ofstream out(with_suffix(stem, ".hdr"));
    if (!out) throw std::runtime_error("snapshot: cannot write " + stem.string() + ".hdr");
    out << "kind = " << kind << '\n'
        << "n_x = " << grid.n_x() << '\n'
        << "n_y = " << grid.n_y() << '\n'
        << "length_x = " << format_double(grid.length_x()) << '\n'
        << "length_y = " << format_double(grid.length_y()) << '\n'
        << "time_au = " << format_double(time_au) << '\n'
        << "components = " << components << '\n'
        << "layout = row-major x-slow float64 little-endian"
        << (kind == "spinor" ? " (re,im) psi1 then psi2" : "") << '\n';
    for (const auto& [k, v] : extra) out << k << " = " << v << '\n';
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

Grid2D header_grid(const SnapshotHeader& h) { return Grid2D(h.n_x, h.n_y, h.length_x, h.length_y); }

}  // namespace

SnapshotHeader read_snapshot_header(const fs::path& stem) {
    std::ifstream in(with_suffix(stem, ".hdr"));
    if (!in) throw std::runtime_error("snapshot: cannot read " + stem.string() + ".hdr");
    SnapshotHeader h;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "kind") h.kind = value;
        else if (key == "n_x") h.n_x = std::stoul(value);
        else if (key == "n_y") h.n_y = std::stoul(value);
        else if (key == "length_x") h.length_x = std::stod(value);
        else if (key == "length_y") h.length_y = std::stod(value);
        else if (key == "time_au") h.time_au = std::stod(value);
        else if (key != "components" && key != "layout") h.extra[key] = value;
    }
    return h;
}

void write_spinor_snapshot(const fs::path& stem, const SpinorField& state, double time_au,
                           const std::map<std::string, std::string>& extra) {
    write_header(stem, "spinor", state.grid, time_au, 2, extra);
    std::ofstream out(with_suffix(stem, ".bin"), std::ios::binary);
    if (!out) throw std::runtime_error("snapshot: cannot write " + stem.string() + ".bin");
    for (int c = 0; c < 2; ++c) {
        for (const cplx& v : state.component(c)) {
            put_double(out, v.real());
            put_double(out, v.imag());
        }
    }
}

SpinorField read_spinor_snapshot(const fs::path& stem, double* time_au) {
    const SnapshotHeader h = read_snapshot_header(stem);
    if (h.kind != "spinor") throw std::runtime_error("snapshot: not a spinor snapshot");
    SpinorField state(header_grid(h));
    std::ifstream in(with_suffix(stem, ".bin"), std::ios::binary);
    if (!in) throw std::runtime_error("snapshot: cannot read " + stem.string() + ".bin");
    for (int c = 0; c < 2; ++c) {
        for (cplx& v : state.component(c)) {
            const double re = get_double(in);
            const double im = get_double(in);
            v = {re, im};
        }
    }
    if (time_au) *time_au = h.time_au;
    return state;
}

void write_real_snapshot(const fs::path& stem, const Grid2D& grid, const RealField& values,
                         double time_au) {
    if (values.size() != grid.size()) throw std::invalid_argument("snapshot: size mismatch");
    write_header(stem, "real", grid, time_au, 1, {});
    std::ofstream out(with_suffix(stem, ".bin"), std::ios::binary);
    for (double v : values) put_double(out, v);
}

RealField read_real_snapshot(const fs::path& stem, Grid2D* grid, double* time_au) {
    const SnapshotHeader h = read_snapshot_header(stem);
    if (h.kind != "real") throw std::runtime_error("snapshot: not a real-field snapshot");
    const Grid2D g = header_grid(h);
    RealField values(g.size());
    std::ifstream in(with_suffix(stem, ".bin"), std::ios::binary);
    for (double& v : values) v = get_double(in);
    if (grid) *grid = g;
    if (time_au) *time_au = h.time_au;
    return values;
}

void write_field_bundle(const fs::path& stem, const Grid2D& grid, const FieldBundle& fields,
                        double time_au) {
    std::string names;
    for (const auto& [name, values] : fields) {
        if (values.size() != grid.size()) throw std::invalid_argument("bundle: size mismatch for " + name);
        names += (names.empty() ? "" : ",") + name;
    }
    write_header(stem, "bundle", grid, time_au, static_cast<int>(fields.size()), {{"fields", names}});
    std::ofstream out(with_suffix(stem, ".bin"), std::ios::binary);
    if (!out) throw std::runtime_error("snapshot: cannot write " + stem.string() + ".bin");
    for (const auto& [name, values] : fields) {
        for (double v : values) put_double(out, v);
    }
}

FieldBundle read_field_bundle(const fs::path& stem, double* time_au) {
    const SnapshotHeader h = read_snapshot_header(stem);
    if (h.kind != "bundle") throw std::runtime_error("snapshot: not a field bundle");
    const Grid2D g = header_grid(h);
    FieldBundle fields;
    std::ifstream in(with_suffix(stem, ".bin"), std::ios::binary);
    if (!in) throw std::runtime_error("snapshot: cannot read " + stem.string() + ".bin");
    std::istringstream names(h.extra.count("fields") ? h.extra.at("fields") : "");
    std::string name;
    while (std::getline(names, name, ',')) {
        RealField values(g.size());
        for (double& v : values) v = get_double(in);
        fields[name] = std::move(values);
    }
    if (time_au) *time_au = h.time_au;
    return fields;
}

void write_spinor_csv(const fs::path& file, const SpinorField& state) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "x_a0,y_a0,re_psi1,im_psi1,re_psi2,im_psi2,density_per_a0sq\n";
    out << std::setprecision(17);
    const Grid2D& g = state.grid;
    for (std::size_t i = 0; i < g.n_x(); ++i) {
        for (std::size_t j = 0; j < g.n_y(); ++j) {
            const std::size_t k = g.index(i, j);
            const cplx a = state.psi1[k];
            const cplx b = state.psi2[k];
            out << g.x(i) << ',' << g.y(j) << ',' << a.real() << ',' << a.imag() << ','
                << b.real() << ',' << b.imag() << ',' << std::norm(a) + std::norm(b) << '\n';
        }
    }
}

}  // namespace geophase
