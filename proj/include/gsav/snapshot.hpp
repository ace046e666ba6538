#ifndef GSAV_SNAPSHOT_HPP
#define GSAV_SNAPSHOT_HPP

#include <string>

#include "gsav/grid.hpp"

namespace gsav {

/// Snapshot file: one text header line
///   GSAV1 <nx> <ny> <ax> <bx> <ay> <by> <t> <component>\n
/// followed by nx*ny little-endian IEEE-754 doubles, row-major.
void write_snapshot(const std::string& path, const Field& f, double t, int component);

struct Snapshot {
    Field field;
    double t = 0;
    int component = 0;
};

Snapshot read_snapshot(const std::string& path);

}  // namespace gsav

#endif
