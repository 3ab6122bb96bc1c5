#pragma once

#include <optional>
#include <string>
#include <vector>

#include "logpot/potential.hpp"
#include "logpot/ratlp.hpp"

namespace logpot {

struct PotentialAtom {
    enum class Kind { Rank, Log };
    Kind kind = Kind::Log;
    std::size_t slot = 0;
    LogIndex index;

    static PotentialAtom rank_of(std::size_t slot) { return {Kind::Rank, slot, {}}; }
    static PotentialAtom log_of(LogIndex i) { return {Kind::Log, 0, std::move(i)}; }

    auto operator<=>(const PotentialAtom&) const = default;
};

std::string to_string(const PotentialAtom& a);

// One hypothesis Σ coeffs·x <= bound over the atom vector x.
struct FactRow {
    std::string schema;
    std::map<std::size_t, Rational> coeffs;
    Rational bound;
};

struct FactSystem {
    std::size_t arity = 0;
    std::vector<LogIndex> atoms;
    std::vector<FactRow> rows;

    std::optional<std::size_t> find(const LogIndex& i) const;
    // Numeric truth of every row for the given sizes, up to tol.
    bool holds_for(const std::vector<double>& sizes, double tol = 1e-9) const;
};

// Φ(ctx; hi) >= Φ(ctx; lo) over a context of `arity` trees.
template <class Coeff>
struct EntailmentObligation {
    std::size_t arity = 0;
    AnnotationOf<Coeff> hi, lo;
};

// Log atoms with nonzero coefficient on either side, optionally closed under
// pairwise sums of guaranteed >= 1 arguments (one round).
std::vector<LogIndex> collect_atoms(const Annotation& hi, const Annotation& lo, bool closure = true);

// floor and ceiling of log2(b); both 0 for b <= 1.
std::pair<unsigned, unsigned> log2_bracket(unsigned b);

std::vector<LogIndex> closure_of(std::vector<LogIndex> atoms);

// Monotonicity (F1), the 2 + log x + log y <= 2 log(x + y) law (F2),
// constants (F3) and nonnegativity (F4).
FactSystem expert_facts(std::size_t arity, std::vector<LogIndex> atoms);

// Nonnegative multipliers, one row per goal and one column per fact.
struct FarkasCertificate {
    std::vector<std::vector<Rational>> multipliers;
};

// Goals U·x <= v. Returns a certificate with F >= 0, U <= F·A, F·b <= v, or
// nothing if none exists.
std::optional<FarkasCertificate> farkas_entails(const FactSystem& facts, const std::vector<std::vector<Rational>>& U,
                                                const std::vector<Rational>& v);

bool verify_certificate(const FactSystem& facts, const std::vector<std::vector<Rational>>& U,
                        const std::vector<Rational>& v, const FarkasCertificate& cert);

// Known annotations: log part of Φ(hi) >= Φ(lo) as a single goal.
struct EntailmentResult {
    bool rank_ok = false;
    std::optional<FarkasCertificate> certificate;
    FactSystem facts;
    std::vector<Rational> goal;
    bool holds() const { return rank_ok && certificate.has_value(); }
};

EntailmentResult entails(const EntailmentObligation<Rational>& ob, bool closure = true);

// Symbolic mode: adds fresh multipliers and the linear Farkas conditions to lp.
// Returns the multiplier variables.
std::vector<VarId> farkas_constraints(LinearProgram& lp, const FactSystem& facts, const std::vector<LinExpr>& goal,
                                      const LinExpr& bound, const std::string& tag);

// hi_i >= lo_i for every slot.
void check_rank_side(LinearProgram& lp, const EntailmentObligation<LinExpr>& ob, const std::string& tag);
std::vector<LinExpr> rank_side(const EntailmentObligation<LinExpr>& ob);

// Adds the complete encoding of an obligation over the given atoms.
void encode_obligation(LinearProgram& lp, const EntailmentObligation<LinExpr>& ob, const FactSystem& facts,
                       const std::string& tag);

// JSON text: atoms, fact rows (schema and indices) and multipliers.
std::string certificate_json(const FactSystem& facts, const FarkasCertificate& cert, const std::vector<Rational>& goal);

} // namespace logpot
