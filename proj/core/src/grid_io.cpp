#include "grushin/grid_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "grushin/error.hpp"

namespace grushin {

namespace {

template <typename T>
void put_le(std::ostream& os, T v) {
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char buf[8];
    for (int k = 0; k < 8; ++k) buf[k] = static_cast<unsigned char>(bits >> (8 * k));
    os.write(reinterpret_cast<const char*>(buf), 8);
}

template <typename T>
T get_le(std::istream& is) {
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char*>(buf), 8)) throw Error("read_binary: truncated input");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
    T v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ofstream os(path, mode);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    return os;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ifstream is(path, mode);
    if (!is) throw Error("cannot open " + path.string());
    return is;
}

}  // namespace

void write_csv(const GridFunction& u, std::ostream& os) {
    const auto& g = u.grid();
    os << std::setprecision(17) << "x,y,value\n";
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) os << g.x(i) << ',' << g.y(j) << ',' << u(i, j) << '\n';
}

void write_csv(const GridFunction& u, const std::filesystem::path& path) {
    auto os = open_out(path, std::ios::out);
    write_csv(u, os);
}

GridFunction read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error("read_csv: empty input");
    std::vector<double> xs, ys, vs;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double x, y, v;
        if (!(row >> x >> y >> v)) throw Error("read_csv: malformed row '" + line + "'");
        xs.push_back(x);
        ys.push_back(y);
        vs.push_back(v);
    }
    auto distinct = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    const auto ux = distinct(xs), uy = distinct(ys);
    if (ux.size() * uy.size() != vs.size()) throw Error("read_csv: rows do not form a tensor grid");
    Grid2D g(ux.front(), ux.back(), uy.front(), uy.back(), ux.size(), uy.size());
    std::vector<double> values(g.size());
    for (std::size_t k = 0; k < vs.size(); ++k) {
        const auto i = static_cast<std::size_t>(std::lower_bound(ux.begin(), ux.end(), xs[k]) - ux.begin());
        const auto j = static_cast<std::size_t>(std::lower_bound(uy.begin(), uy.end(), ys[k]) - uy.begin());
        values[i * g.ny() + j] = vs[k];
    }
    return GridFunction(g, std::move(values));
}

GridFunction read_csv(const std::filesystem::path& path) {
    auto is = open_in(path, std::ios::in);
    return read_csv(is);
}

void write_binary(const GridFunction& u, std::ostream& os) {
    const auto& g = u.grid();
    put_le(os, g.x0());
    put_le(os, g.x1());
    put_le(os, g.y0());
    put_le(os, g.y1());
    put_le(os, static_cast<std::uint64_t>(g.nx()));
    put_le(os, static_cast<std::uint64_t>(g.ny()));
    for (double v : u.values()) put_le(os, v);
}

void write_binary(const GridFunction& u, const std::filesystem::path& path) {
    auto os = open_out(path, std::ios::out | std::ios::binary);
    write_binary(u, os);
}

GridFunction read_binary(std::istream& is) {
    const double x0 = get_le<double>(is), x1 = get_le<double>(is);
    const double y0 = get_le<double>(is), y1 = get_le<double>(is);
    const auto nx = get_le<std::uint64_t>(is), ny = get_le<std::uint64_t>(is);
    if (nx > (1u << 24) || ny > (1u << 24)) throw Error("read_binary: implausible grid size");
    Grid2D g(x0, x1, y0, y1, nx, ny);
    std::vector<double> values(g.size());
    for (auto& v : values) v = get_le<double>(is);
    return GridFunction(g, std::move(values));
}

GridFunction read_binary(const std::filesystem::path& path) {
    auto is = open_in(path, std::ios::in | std::ios::binary);
    return read_binary(is);
}

}  // namespace grushin
