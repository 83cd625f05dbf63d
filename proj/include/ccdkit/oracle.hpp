#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccdkit/broadphase.hpp"

namespace ccdkit {

// Independent ground truth for a narrow-phase query at zero separation.
//
// The coplanarity polynomial in t (degree <= 3) has coefficients computed
// exactly in rational arithmetic from the floating-point inputs. Its real
// roots in [0,1] are isolated with Sturm sequences, refined to certified
// rational bounds, and validated (barycentric / segment-parameter ranges)
// with exact rational interval arithmetic. Exactly-rational roots are
// detected and reported with zero-width bounds.
struct OracleVerdict {
    bool colliding = false;
    bool indeterminate = false; // validity undecidable at the precision cap

    // Enclosure of the exact earliest valid root, rounded outward to double
    // (lo down, hi up): a double toi satisfies toi <= exact root iff
    // toi <= root_lo. Valid only when colliding.
    double root_lo = 0.0;
    double root_hi = 0.0;
    bool root_exact = false; // bounds coincide as rationals
    double root_width = 0.0; // hi - lo, rounded up

    // Certified lower bound on min over the domain of ||F||_inf, rounded
    // down; meaningful when not colliding. margin_valid is false when the
    // bound could not be certified above zero within the iteration budget.
    double margin = 0.0;
    bool margin_valid = false;

    // Decimal serializations of the rational bounds (lo rounded down, hi up).
    std::string root_lo_dec;
    std::string root_hi_dec;
};

struct OracleOptions {
    unsigned precision_bits = 128;    // refine root bounds to width <= 2^-precision
    unsigned max_refine_bits = 640;   // widening cap for indeterminate validity tests
    bool compute_margin = true;
    unsigned margin_iterations = 200;  // branch-and-bound refinement steps
    double margin_target = 1e-3;       // stop refining once the bound reaches
                                       // this (0 = use the full budget)
};

OracleVerdict oracle_toi(const NarrowQuery& query, const OracleOptions& opts = {});

inline OracleVerdict oracle_toi(const NarrowQuery& query, unsigned precision_bits)
{
    OracleOptions opts;
    opts.precision_bits = precision_bits;
    return oracle_toi(query, opts);
}

struct GroundTruthPair {
    CandidatePair pair;
    OracleVerdict verdict;
};

struct GroundTruth {
    std::vector<GroundTruthPair> colliding;    // sorted by pair
    std::vector<CandidatePair> indeterminate;  // excluded from FN accounting
    std::size_t pairs_evaluated = 0;
    std::size_t pairs_prefiltered = 0; // dismissed by the exact swept-hull test
};

// All non-adjacent vertex-face and edge-edge pairs of a (desk-scale) scene,
// evaluated by oracle_toi. Pairs whose exact double-precision swept hulls are
// disjoint are dismissed without polynomial work; that test is independent of
// the broad-phase implementation.
GroundTruth ground_truth_pairs(const SceneStep& scene, const OracleOptions& opts = {},
                               unsigned threads = 1);

// FNV-1a over the query kind and the raw bit patterns of its 24 coordinates.
std::uint64_t query_hash(const NarrowQuery& query);

// Golden-file serialization: {"hash", "colliding", "indeterminate",
// "root_lo", "root_hi", "margin"} with bounds as decimal strings.
std::string verdict_to_json(const NarrowQuery& query, const OracleVerdict& verdict);

} // namespace ccdkit
