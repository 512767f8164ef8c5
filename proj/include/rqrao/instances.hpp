#pragma once

#include "rqrao/graph.hpp"

namespace rqrao {

/// Pinned 14-node, 46-edge, +-1-weight benchmark instance (density 0.5
/// family). Its MAX-CUT optimum is certified by exhaustive search: weight 12,
/// unique up to the global bit flip, attained at 00001101101010. Used as
/// ground truth by tests and the acceptance suite; data/rnd14.rudy carries
/// the same instance for the CLI.
inline const Graph& rnd14_instance() {
    static const Graph g = parse_rudy(
        "14 46\n"
        "1 2 -1\n1 3 -1\n1 4 -1\n1 5 -1\n1 8 1\n1 9 1\n1 14 1\n"
        "2 6 1\n2 9 1\n2 12 1\n"
        "3 5 1\n3 7 -1\n3 9 1\n3 10 -1\n3 11 1\n3 13 1\n3 14 1\n"
        "4 8 1\n4 9 1\n4 10 -1\n4 11 -1\n4 12 -1\n4 13 -1\n"
        "5 6 -1\n5 9 -1\n5 11 -1\n5 13 -1\n5 14 1\n"
        "6 7 1\n6 8 -1\n6 10 -1\n6 11 1\n6 12 1\n"
        "7 8 1\n7 10 1\n7 11 1\n7 14 -1\n"
        "8 13 -1\n8 14 1\n"
        "9 10 -1\n"
        "10 11 1\n10 12 -1\n10 14 -1\n"
        "11 12 1\n11 14 -1\n"
        "12 14 -1\n");
    return g;
}

inline const char* rnd14_optimum_bits() { return "00001101101010"; }
inline constexpr double rnd14_optimum_weight = 12.0;

} // namespace rqrao
