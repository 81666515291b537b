// SPDX-License-Identifier: Apache-2.0
#include "nnbarrier/conic.hpp"

#include <cstdio>
#include <sstream>

namespace nnb {

const char* to_string(ConicStatus s) {
    switch (s) {
        case ConicStatus::Optimal: return "optimal";
        case ConicStatus::Infeasible: return "infeasible";
        default: return "numerical_failure";
    }
}

// Dump format, one problem per file:
//   conic-sdp 1
//   blocks <K> : <size_1> ... <size_K>
//   rows <p>
//   objective <nnz> followed by "<block> <r> <c> <v>" triplet lines
//   row <i> <rhs> <nnz> followed by triplet lines
// Reals are printed with %.17g so identical problems dump byte-identically.
namespace {

void print_entry(std::ostringstream& os, const ConicEntry& e) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", e.v);
    os << e.block << ' ' << e.r << ' ' << e.c << ' ' << buf << '\n';
}

}  // namespace

std::string ConicProblem::dump() const {
    std::ostringstream os;
    os << "conic-sdp 1\n";
    os << "blocks " << block_sizes.size() << " :";
    for (int s : block_sizes) os << ' ' << s;
    os << '\n';
    os << "rows " << rows.size() << '\n';
    os << "objective " << objective.size() << '\n';
    for (const auto& e : objective) print_entry(os, e);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.17g", rows[i].rhs);
        os << "row " << i << ' ' << buf << ' ' << rows[i].entries.size() << '\n';
        for (const auto& e : rows[i].entries) print_entry(os, e);
    }
    return os.str();
}

}  // namespace nnb
