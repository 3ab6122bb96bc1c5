#pragma once

#include <map>
#include <string>
#include <vector>

#include "logpot/entail.hpp"
#include "logpot/potential.hpp"
#include "logpot/ratlp.hpp"
#include "logpot/syntax.hpp"

namespace logpot {

enum class TypingMode { Costed, CostFree };

using SymAnnotation = AnnotationOf<LinExpr>;
using SignatureTable = std::map<std::string, AnnotatedSignature>;

SymAnnotation lift(const Annotation& q);
// Value of a symbolic annotation under an LP assignment.
Annotation evaluate(const SymAnnotation& q, const std::vector<Rational>& values);
// Fresh nonnegative unknowns over the template indices; `name` prefixes the
// variable names as `name.rank1`, `name.log(1,0|2)`.
SymAnnotation fresh_annotation(LinearProgram& lp, std::size_t arity, const IndexTemplate& t, const std::string& name,
                               bool with_rank = true);

struct TypingContext {
    std::vector<std::pair<std::string, SimpleType>> vars;

    std::vector<std::string> trees() const;
    std::size_t arity() const { return trees().size(); }
    bool contains(const std::string& x) const;
    std::optional<SimpleType> type_of(const std::string& x) const;
};

struct Judgement {
    TypingContext ctx;
    SymAnnotation q;
    ExprPtr expr;
    SimpleType type = SimpleType::Tree;
    SymAnnotation qp;
    TypingMode mode = TypingMode::Costed;
};

// expr (rel) 0
struct Constraint {
    LinExpr expr;
    Relation rel = Relation::Eq;
    std::string label;
};

struct ConstraintSet {
    std::vector<Constraint> constraints;
    std::vector<EntailmentObligation<LinExpr>> obligations;
    std::vector<Judgement> premises;

    void append(ConstraintSet other);
    // Adds rows and the Farkas encoding of every obligation.
    void add_to(LinearProgram& lp, const IndexTemplate& t, const std::string& tag = "c") const;
};

class TypingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Expression-level rule images.
// Leaf branch of a match on slot k: P over the remaining slots.
SymAnnotation match_leaf_image(const SymAnnotation& q, std::size_t k);
// Node branch: slot k removed, its left and right subtrees appended.
SymAnnotation match_node_image(const SymAnnotation& q, std::size_t k);
// Context annotation over (x1, x3) that pays for building a node with Q'.
SymAnnotation node_image(const SymAnnotation& qp);
// Constants that pay for a leaf with Q'.
SymAnnotation leaf_image(const SymAnnotation& qp);
// Removes slot k; indices mentioning it are discarded.
SymAnnotation drop_slot(const SymAnnotation& q, std::size_t k);

// Single-rule constraint emission. Premise annotations are fresh unknowns of
// lp named after `tag`. The rules' side conditions become equalities.
ConstraintSet emit_var(const Judgement& j);
ConstraintSet emit_leaf(const Judgement& j);
ConstraintSet emit_node(const Judgement& j);
ConstraintSet emit_cmp(const Judgement& j);
ConstraintSet emit_ite(LinearProgram& lp, const Judgement& j, const IndexTemplate& t, const std::string& tag);
ConstraintSet emit_match(LinearProgram& lp, const Judgement& j, const IndexTemplate& t, const std::string& tag);

struct LetShape {
    // Tree slots of Q belonging to e1 (first m) and to e2 (remaining k).
    std::size_t m = 0, k = 0;
    SimpleType bound_type = SimpleType::Tree;
    // Nonzero b vectors for the cost-free family; empty means the default
    // {0,1}-vectors with at most two nonzero entries.
    std::vector<std::vector<unsigned>> family;
    bool split_constants = false;
};
// Premises: [0] costed e1 under (P, P'), [1..] cost-free e1 under (P_b, P'_b), last: e2 under R.
ConstraintSet emit_let(LinearProgram& lp, const Judgement& j, const LetShape& shape, const IndexTemplate& t,
                       const std::string& tag);
ConstraintSet emit_app(const Judgement& j, const SymAnnotation& qf, const SymAnnotation& qpf);
ConstraintSet emit_share(LinearProgram& lp, const Judgement& j, std::size_t i, std::size_t jj, const IndexTemplate& t,
                         const std::string& tag);
ConstraintSet emit_weakvar(LinearProgram& lp, const Judgement& j, const std::string& x, const IndexTemplate& t,
                           const std::string& tag);
// Weak rule: Φ(Γ;Q) >= Φ(Γ;P) and Φ(P') >= Φ(Q') with fresh P, P'.
ConstraintSet emit_weak(LinearProgram& lp, const Judgement& j, const IndexTemplate& t, const std::string& tag);

std::vector<std::vector<unsigned>> default_family(std::size_t k);

// Constant potential q_(0,0,c) at a let: given to both premises as the rule
// is stated, or split between them with a fresh unknown.
enum class LetConstants { Shared, Split };

struct TypingOptions {
    IndexTemplate tmpl;
    LetConstants let_constants = LetConstants::Shared;
    unsigned cf_nesting_cap = 2;
    // Candidate cost-free pairs are inferred when a signature lists none.
    bool infer_cost_free = true;
    // Second stage of inference: maximise result coefficients at the optimum.
    bool refine_results = true;
    LpOptions lp;
};

struct DerivationStats {
    std::size_t lp_vars = 0;
    std::size_t lp_rows = 0;
    std::size_t obligations = 0;
    std::size_t lets = 0;
    std::size_t cap_hits = 0;
    std::size_t pivots = 0;
};

struct FunctionVerdict {
    std::string function;
    bool typable = false;
    std::string reason;
    DerivationStats stats;
};

struct CheckResult {
    bool typable = false;
    std::vector<FunctionVerdict> functions;
    // Cost-free pairs that were certified and used.
    SignatureTable cost_free;
    std::vector<std::string> notes;
};

CheckResult check_program(const Program& p, const SignatureTable& sigs, const TypingOptions& opts = {});

struct InferResult {
    bool feasible = false;
    SignatureTable signatures;
    DerivationStats stats;
    Rational objective;
    std::string hint;
    std::vector<std::string> notes;
};

// Infers one costed pair per function reachable from roots (all when empty),
// plus certified cost-free pairs.
InferResult infer_program(const Program& p, const TypingOptions& opts = {}, const std::vector<std::string>& roots = {});

// Greatest set of unit cost-free pairs per function that type-check assuming
// the set itself at recursive calls.
SignatureTable infer_cost_free(const Program& p, const TypingOptions& opts, const std::vector<std::string>& functions,
                               const SignatureTable& given = {});

} // namespace logpot
