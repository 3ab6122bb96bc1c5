#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "logpot/corpus.hpp"
#include "logpot/interp.hpp"
#include "logpot/typing.hpp"

namespace logpot {

// Bad input: unreadable or malformed files, arguments that do not fit.
class DriverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DriverOptions {
    IndexTemplate tmpl;
    // Unset: check and validate use Shared, infer uses Split.
    std::optional<LetConstants> let_constants;
    std::uint64_t fuel = 1'000'000;
    std::uint64_t seed = 1;
    CorpusSpec corpus;
    // Validate without certifying the signature first.
    bool force = false;
    // Functions to infer; empty means all.
    std::vector<std::string> roots;
    // Where infer writes its signatures; empty means next to the program.
    std::string sig_out;
    unsigned threads = 0;
    std::size_t sequences = 100;
    std::size_t sequence_length = 256;
    std::size_t sequence_leaves = 64;
    double tolerance = 1e-6;
    double sequence_tolerance = 1e-4;
};

struct Report {
    int exit_code = 0;
    nlohmann::json json;
    std::string text;
};

Report cmd_check(const std::string& program_file, const std::string& sig_file, const DriverOptions& opts = {});
Report cmd_infer(const std::string& program_file, const DriverOptions& opts = {});
Report cmd_eval(const std::string& program_file, const std::string& function, const std::vector<std::string>& args,
                const DriverOptions& opts = {});
Report cmd_validate(const std::string& program_file, const std::string& sig_file, const DriverOptions& opts = {});

// Φ(args; q) - Φ(result; q') - cost over a corpus.
struct ValidationStats {
    std::string function;
    std::string kind;
    std::size_t inputs = 0;
    std::size_t violations = 0;
    std::size_t nonterminating = 0;
    double min_slack = 0;
    double max_slack = 0;
    std::string witness;
    double witness_slack = 0;
};

ValidationStats validate_pair(const Program& p, const std::string& function, const Annotation& q, const Annotation& qp,
                              CostMode mode, const std::vector<Tree>& trees, const CorpusSpec& spec,
                              std::uint64_t fuel = 1'000'000, unsigned threads = 0, double tol = 1e-6);

// Repeated application t_{i+1} = f(k_i, t_i) from random trees; the total
// cost must stay below q·rk(t_0) + Σ (Φ(t_i; Q) - q·rk(t_i)).
struct TelescopingStats {
    std::string function;
    bool applicable = false;
    std::size_t sequences = 0;
    std::size_t operations = 0;
    std::size_t violations = 0;
    double min_slack = 0;
    std::string witness;
};

TelescopingStats telescoping(const Program& p, const std::string& function, const Annotation& q, const Annotation& qp,
                             std::size_t sequences, std::size_t length, std::size_t leaves, std::uint64_t seed,
                             std::uint64_t fuel = 1'000'000, double tol = 1e-4);

TypingOptions typing_options(const DriverOptions& opts, LetConstants fallback);

std::string read_file(const std::string& path);
Program load_program(const std::string& path);
SignatureTable load_signatures(const std::string& path);

} // namespace logpot
