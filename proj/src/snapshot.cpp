#include "gsav/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gsav {

namespace {

void write_le_doubles(std::ostream& out, const Eigen::ArrayXd& v) {
    static_assert(sizeof(double) == 8);
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(v.data()), v.size() * 8);
    } else {
        for (long i = 0; i < v.size(); ++i) {
            std::uint64_t bits;
            std::memcpy(&bits, &v[i], 8);
            char buf[8];
            for (int b = 0; b < 8; ++b) buf[b] = char((bits >> (8 * b)) & 0xff);
            out.write(buf, 8);
        }
    }
}

void read_le_doubles(std::istream& in, Eigen::ArrayXd& v) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(v.data()), v.size() * 8);
    } else {
        for (long i = 0; i < v.size(); ++i) {
            char buf[8];
            in.read(buf, 8);
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b) bits |= std::uint64_t(static_cast<unsigned char>(buf[b])) << (8 * b);
            std::memcpy(&v[i], &bits, 8);
        }
    }
}

}  // namespace

void write_snapshot(const std::string& path, const Field& f, double t, int component) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open snapshot for writing: " + path);
    std::ostringstream header;
    header.precision(17);
    header << "GSAV1 " << f.grid.nx << " " << f.grid.ny << " " << f.grid.ax << " " << f.grid.bx
           << " " << f.grid.ay << " " << f.grid.by << " " << t << " " << component << "\n";
    out << header.str();
    write_le_doubles(out, f.values);
    if (!out) throw IoError("short write on snapshot: " + path);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot: " + path);
    std::string header;
    std::getline(in, header);
    std::istringstream h(header);
    std::string magic;
    int nx, ny, component;
    double ax, bx, ay, by, t;
    if (!(h >> magic >> nx >> ny >> ax >> bx >> ay >> by >> t >> component) || magic != "GSAV1")
        throw IoError("bad snapshot header: " + path);
    Snapshot snap;
    snap.field = Field(Grid(nx, ny, ax, bx, ay, by));
    snap.t = t;
    snap.component = component;
    read_le_doubles(in, snap.field.values);
    if (!in) throw IoError("short read on snapshot: " + path);
    return snap;
}

}  // namespace gsav
