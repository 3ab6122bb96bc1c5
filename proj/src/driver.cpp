#include "logpot/driver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "logpot/sigfile.hpp"
#include "logpot/wellformed.hpp"

namespace logpot {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DriverError("cannot read '" + path + "'");
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Program load_program(const std::string& path) {
    std::string src = read_file(path);
    try {
        return resolve_types(parse_program(src));
    } catch (const ParseError& e) {
        throw DriverError(path + ":" + e.what());
    } catch (const std::invalid_argument& e) {
        throw DriverError(path + ": " + e.what());
    }
}

SignatureTable load_signatures(const std::string& path) {
    std::string src = read_file(path);
    try {
        return parse_signatures(src);
    } catch (const std::exception& e) {
        throw DriverError(path + ": " + e.what());
    }
}

TypingOptions typing_options(const DriverOptions& opts, LetConstants fallback) {
    TypingOptions t;
    t.tmpl = opts.tmpl;
    t.let_constants = opts.let_constants.value_or(fallback);
    return t;
}

namespace {

const char* name_of(LetConstants c) { return c == LetConstants::Shared ? "shared" : "split"; }

unsigned worker_count(unsigned requested, std::size_t jobs) {
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return unsigned(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

json stats_json(const DerivationStats& s) {
    return {{"lp_vars", s.lp_vars}, {"lp_rows", s.lp_rows}, {"obligations", s.obligations},
            {"lets", s.lets},       {"cap_hits", s.cap_hits}, {"pivots", s.pivots}};
}

json signatures_json(const SignatureTable& sigs) {
    json out = json::object();
    for (const auto& [name, sig] : sigs) {
        json costed = json::array(), cf = json::array();
        for (const auto& [q, qp] : sig.costed) costed.push_back({{"input", format_annotation(q)}, {"result", format_annotation(qp)}});
        for (const auto& [q, qp] : sig.cost_free) cf.push_back({{"input", format_annotation(q)}, {"result", format_annotation(qp)}});
        out[name] = {{"type", to_string(sig.type)}, {"costed", costed}, {"cost_free", cf}};
    }
    return out;
}

json validation_json(const ValidationStats& v) {
    json j = {{"function", v.function}, {"kind", v.kind},           {"inputs", v.inputs},
              {"violations", v.violations}, {"nonterminating", v.nonterminating}};
    if (v.inputs) {
        j["min_slack"] = v.min_slack;
        j["max_slack"] = v.max_slack;
    }
    if (!v.witness.empty()) j["witness"] = {{"input", v.witness}, {"slack", v.witness_slack}};
    return j;
}

json telescoping_json(const TelescopingStats& t) {
    json j = {{"function", t.function}, {"sequences", t.sequences}, {"operations", t.operations},
              {"violations", t.violations}};
    if (t.operations) j["min_slack"] = t.min_slack;
    if (!t.witness.empty()) j["witness"] = t.witness;
    return j;
}

std::string slack_text(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

// Argument vectors for one corpus tree.
std::vector<std::vector<Value>> inputs_for(const FunctionType& type, const std::vector<Tree>& trees, std::size_t i,
                                           const CorpusSpec& spec) {
    std::vector<std::vector<Value>> out{{}};
    std::size_t tree_no = 0;
    std::vector<BaseValue> keys = probe_keys(trees[i], spec);
    for (SimpleType t : type.params) {
        std::vector<Value> choices;
        if (t == SimpleType::Tree) choices.push_back(Value::tree(trees[(i + tree_no++) % trees.size()]));
        else if (t == SimpleType::Bool) choices = {Value::boolean(false), Value::boolean(true)};
        else
            for (const auto& k : keys) choices.push_back(Value::base(k));
        std::vector<std::vector<Value>> next;
        for (const auto& prefix : out)
            for (const auto& c : choices) {
                auto v = prefix;
                v.push_back(c);
                next.push_back(std::move(v));
            }
        out = std::move(next);
    }
    return out;
}

// The typing judgement bounds the cost of the body; the call itself adds 1.
std::uint64_t body_cost(const EvalResult& r, CostMode mode) { return mode == CostMode::Costed ? r.cost - 1 : r.cost; }

std::vector<Tree> trees_of(const std::vector<Value>& args) {
    std::vector<Tree> out;
    for (const auto& a : args)
        if (a.is_tree()) out.push_back(a.as_tree());
    return out;
}

std::string call_text(const std::string& f, const std::vector<Value>& args) {
    std::string s = f;
    for (const auto& a : args) s += " " + format_value(a);
    return s;
}

} // namespace

ValidationStats validate_pair(const Program& p, const std::string& function, const Annotation& q, const Annotation& qp,
                              CostMode mode, const std::vector<Tree>& trees, const CorpusSpec& spec, std::uint64_t fuel,
                              unsigned threads, double tol) {
    const FunctionDef* f = p.find(function);
    if (!f || !f->type) throw DriverError("unknown function '" + function + "'");
    ValidationStats total;
    total.function = function;
    total.kind = mode == CostMode::Costed ? "costed" : "cost-free";
    total.min_slack = std::numeric_limits<double>::infinity();
    total.max_slack = -std::numeric_limits<double>::infinity();
    Interpreter interp(p);
    EvalOptions eo;
    eo.mode = mode;
    eo.fuel = fuel;

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t witness_at = std::numeric_limits<std::size_t>::max();
    std::exception_ptr failure;
    auto work = [&] {
        ValidationStats local;
        local.min_slack = total.min_slack;
        local.max_slack = total.max_slack;
        std::size_t local_witness_at = std::numeric_limits<std::size_t>::max();
        try {
            for (std::size_t i; (i = next++) < trees.size();) {
                for (const auto& args : inputs_for(*f->type, trees, i, spec)) {
                    ++local.inputs;
                    EvalResult r;
                    try {
                        r = interp.run_function(function, args, eo);
                    } catch (const NonTermination&) {
                        ++local.nonterminating;
                        continue;
                    }
                    std::vector<Tree> out;
                    if (r.value.is_tree()) out.push_back(r.value.as_tree());
                    double slack = potential(trees_of(args), q) - potential(out, qp) - double(body_cost(r, mode));
                    local.min_slack = std::min(local.min_slack, slack);
                    local.max_slack = std::max(local.max_slack, slack);
                    if (slack < -tol) {
                        ++local.violations;
                        if (i < local_witness_at) {
                            local_witness_at = i;
                            local.witness = call_text(function, args) + " = " + format_value(r.value) + " at body cost " +
                                            std::to_string(body_cost(r, mode));
                            local.witness_slack = slack;
                        }
                    }
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            failure = std::current_exception();
        }
        std::lock_guard<std::mutex> lock(mu);
        total.inputs += local.inputs;
        total.violations += local.violations;
        total.nonterminating += local.nonterminating;
        total.min_slack = std::min(total.min_slack, local.min_slack);
        total.max_slack = std::max(total.max_slack, local.max_slack);
        if (local_witness_at < witness_at) {
            witness_at = local_witness_at;
            total.witness = local.witness;
            total.witness_slack = local.witness_slack;
        }
    };
    std::vector<std::thread> pool;
    unsigned n = worker_count(threads, trees.size());
    for (unsigned k = 0; k < n; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    if (!total.inputs) total.min_slack = total.max_slack = 0;
    return total;
}

TelescopingStats telescoping(const Program& p, const std::string& function, const Annotation& q, const Annotation& qp,
                             std::size_t sequences, std::size_t length, std::size_t leaves, std::uint64_t seed,
                             std::uint64_t fuel, double tol) {
    TelescopingStats st;
    st.function = function;
    const FunctionDef* f = p.find(function);
    if (!f || !f->type) throw DriverError("unknown function '" + function + "'");
    const auto& params = f->type->params;
    if (tree_count(params) != 1 || f->type->result != SimpleType::Tree || q.arity != 1 || qp.arity != 1 ||
        qp.rank[0] < q.rank[0] || leaves == 0)
        return st;
    st.applicable = true;
    st.min_slack = std::numeric_limits<double>::infinity();
    const double rank_coeff = q.rank[0].get_d();
    Interpreter interp(p);
    EvalOptions eo;
    eo.fuel = fuel;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> key(0, long(leaves));
    for (std::size_t s = 0; s < sequences; ++s) {
        Tree t = random_bst(rng, leaves);
        double budget = rank_coeff * rank(t);
        std::uint64_t cost = 0;
        for (std::size_t i = 0; i < length; ++i) {
            std::vector<Value> args;
            for (SimpleType ty : params) {
                if (ty == SimpleType::Tree) args.push_back(Value::tree(t));
                else if (ty == SimpleType::Bool) args.push_back(Value::boolean(key(rng) % 2));
                else args.push_back(Value::base(key(rng)));
            }
            budget += potential(t, q) - rank_coeff * rank(t);
            EvalResult r = interp.run_function(function, args, eo);
            cost += body_cost(r, CostMode::Costed);
            t = r.value.as_tree();
            ++st.operations;
        }
        ++st.sequences;
        double slack = budget - double(cost);
        st.min_slack = std::min(st.min_slack, slack);
        if (slack < -tol) {
            ++st.violations;
            if (st.witness.empty())
                st.witness = "sequence " + std::to_string(s) + ": cost " + std::to_string(cost) + " exceeds " +
                             slack_text(budget);
        }
    }
    if (!st.operations) st.min_slack = 0;
    return st;
}

namespace {

Report finish(Report r, const std::string& command) {
    r.json["command"] = command;
    r.json["exit_code"] = r.exit_code;
    return r;
}

template <class F>
Report guarded(const std::string& command, F body) {
    try {
        return finish(body(), command);
    } catch (const DriverError& e) {
        Report r;
        r.exit_code = 2;
        r.json["error"] = e.what();
        r.text = std::string("error: ") + e.what() + "\n";
        return finish(r, command);
    } catch (const std::invalid_argument& e) {
        Report r;
        r.exit_code = 2;
        r.json["error"] = e.what();
        r.text = std::string("error: ") + e.what() + "\n";
        return finish(r, command);
    } catch (const TypingError& e) {
        Report r;
        r.exit_code = 2;
        r.json["error"] = e.what();
        r.text = std::string("error: ") + e.what() + "\n";
        return finish(r, command);
    }
}

void check_into(Report& r, const Program& p, const SignatureTable& sigs, const DriverOptions& opts) {
    TypingOptions topts = typing_options(opts, LetConstants::Shared);
    CheckResult res = check_program(p, sigs, topts);
    json fns = json::array();
    std::ostringstream text;
    for (const auto& v : res.functions) {
        json f = {{"function", v.function}, {"typable", v.typable}, {"constraints", stats_json(v.stats)}};
        if (!v.reason.empty()) f["reason"] = v.reason;
        fns.push_back(f);
        text << v.function << ": " << (v.typable ? "typable" : "not typable");
        if (!v.reason.empty()) text << " (" << v.reason << ")";
        text << "; " << v.stats.lp_vars << " unknowns, " << v.stats.lp_rows << " rows, " << v.stats.obligations
             << " entailments\n";
    }
    r.json["typable"] = res.typable;
    r.json["let_constants"] = name_of(topts.let_constants);
    r.json["template"] = to_string(topts.tmpl);
    r.json["functions"] = fns;
    r.json["signatures"] = signatures_json(sigs);
    r.json["cost_free"] = signatures_json(res.cost_free);
    r.json["notes"] = res.notes;
    for (const auto& n : res.notes) text << "note: " << n << "\n";
    text << (res.typable ? "program is well typed\n" : "program is not well typed\n");
    r.text += text.str();
    r.exit_code = res.typable ? 0 : 1;
}

} // namespace

Report cmd_check(const std::string& program_file, const std::string& sig_file, const DriverOptions& opts) {
    return guarded("check", [&] {
        Report r;
        Program p = load_program(program_file);
        SignatureTable sigs = load_signatures(sig_file);
        r.json["program"] = program_file;
        check_into(r, p, sigs, opts);
        return r;
    });
}

Report cmd_infer(const std::string& program_file, const DriverOptions& opts) {
    return guarded("infer", [&] {
        Report r;
        Program p = load_program(program_file);
        for (const auto& f : opts.roots)
            if (!p.find(f)) throw DriverError("unknown function '" + f + "'");
        TypingOptions topts = typing_options(opts, LetConstants::Split);
        InferResult res = infer_program(p, topts, opts.roots);
        r.json["program"] = program_file;
        r.json["feasible"] = res.feasible;
        r.json["let_constants"] = name_of(topts.let_constants);
        r.json["template"] = to_string(topts.tmpl);
        r.json["constraints"] = stats_json(res.stats);
        r.json["notes"] = res.notes;
        std::ostringstream text;
        for (const auto& n : res.notes) text << "note: " << n << "\n";
        if (!res.feasible) {
            r.json["hint"] = res.hint;
            text << "infeasible: " << res.hint << "\n";
            r.text = text.str();
            r.exit_code = 1;
            return r;
        }
        std::string out = opts.sig_out;
        if (out.empty()) out = std::filesystem::path(program_file).replace_extension(".inferred.sig").string();
        std::string sigtext = format_signatures(res.signatures);
        std::ofstream f(out, std::ios::binary);
        if (!f || !(f << sigtext)) throw DriverError("cannot write '" + out + "'");
        r.json["objective"] = res.objective.get_str();
        r.json["signatures"] = signatures_json(res.signatures);
        r.json["signature_file"] = out;
        text << sigtext << "written to " << out << "\n";
        r.text = text.str();
        return r;
    });
}

Report cmd_eval(const std::string& program_file, const std::string& function, const std::vector<std::string>& args,
                const DriverOptions& opts) {
    return guarded("eval", [&] {
        Report r;
        Program p = load_program(program_file);
        const FunctionDef* f = p.find(function);
        if (!f) throw DriverError("unknown function '" + function + "'");
        if (f->params.size() != args.size())
            throw DriverError("usage: '" + function + "' takes " + std::to_string(f->params.size()) + " arguments, got " +
                              std::to_string(args.size()));
        std::vector<Value> values;
        for (std::size_t i = 0; i < args.size(); ++i) {
            try {
                values.push_back(parse_value(args[i]));
            } catch (const std::exception& e) {
                throw DriverError("argument " + std::to_string(i + 1) + ": " + e.what());
            }
        }
        EvalOptions eo;
        eo.fuel = opts.fuel;
        r.json["function"] = function;
        try {
            EvalResult res = run_function(p, function, values, eo);
            r.json["status"] = "value";
            r.json["value"] = format_value(res.value);
            r.json["cost"] = res.cost;
            r.text = format_value(res.value) + "\ncost " + std::to_string(res.cost) + "\n";
        } catch (const NonTermination& e) {
            r.json["status"] = "nontermination";
            r.json["message"] = e.what();
            r.text = std::string("nontermination: ") + e.what() + "\n";
            r.exit_code = 1;
        } catch (const EvalError& e) {
            throw DriverError(std::string("evaluation error: ") + e.what());
        } catch (const std::invalid_argument& e) {
            throw DriverError(std::string("evaluation error: ") + e.what());
        }
        return r;
    });
}

Report cmd_validate(const std::string& program_file, const std::string& sig_file, const DriverOptions& opts) {
    return guarded("validate", [&] {
        Report r;
        Program p = load_program(program_file);
        SignatureTable sigs = load_signatures(sig_file);
        r.json["program"] = program_file;
        bool ok = true;
        if (!opts.force) {
            check_into(r, p, sigs, opts);
            if (r.exit_code != 0) {
                r.text += "signature not certified; pass --force to validate anyway\n";
                return r;
            }
        }
        std::ostringstream text;
        std::vector<Tree> trees = generate(opts.corpus);
        json corpus = {{"generator", opts.corpus.generator == CorpusSpec::Generator::Exhaustive ? "exhaustive" : "random"},
                       {"max_leaves", opts.corpus.max_leaves},
                       {"trees", trees.size()}};
        if (opts.corpus.generator == CorpusSpec::Generator::Random) {
            corpus["count"] = opts.corpus.count;
            corpus["seed"] = opts.corpus.seed;
        }
        json warnings = json::array();
        if (trees.empty()) warnings.push_back("empty corpus: validation is vacuous");
        json pairs = json::array(), seqs = json::array();
        for (const auto& [name, sig] : sigs) {
            if (!p.find(name)) throw DriverError("signature for unknown function '" + name + "'");
            auto run = [&](const Annotation& q, const Annotation& qp, CostMode mode) {
                ValidationStats v = validate_pair(p, name, q, qp, mode, trees, opts.corpus, opts.fuel, opts.threads,
                                                  opts.tolerance);
                pairs.push_back(validation_json(v));
                text << name << " " << v.kind << ": " << v.inputs << " inputs, min slack " << slack_text(v.min_slack)
                     << ", max slack " << slack_text(v.max_slack);
                if (v.nonterminating) text << ", " << v.nonterminating << " out of fuel";
                text << "\n";
                if (v.violations) {
                    ok = false;
                    text << "  violated " << v.violations << " times, e.g. " << v.witness << " (slack "
                         << slack_text(v.witness_slack) << ")\n";
                }
                if (v.nonterminating) ok = false;
            };
            for (const auto& [q, qp] : sig.costed) {
                run(q, qp, CostMode::Costed);
                TelescopingStats t = telescoping(p, name, q, qp, opts.sequences, opts.sequence_length,
                                                 opts.sequence_leaves, opts.seed, opts.fuel, opts.sequence_tolerance);
                if (!t.applicable) continue;
                seqs.push_back(telescoping_json(t));
                text << name << " sequences: " << t.sequences << " x " << opts.sequence_length
                     << " operations, min slack " << slack_text(t.min_slack) << "\n";
                if (t.violations) {
                    ok = false;
                    text << "  " << t.witness << "\n";
                }
            }
            for (const auto& [q, qp] : sig.cost_free) run(q, qp, CostMode::CostFree);
        }
        for (const auto& w : warnings) text << "warning: " << w.get<std::string>() << "\n";
        text << (ok ? "validation passed\n" : "validation failed\n");
        r.json["validation"] = {{"corpus", corpus}, {"pairs", pairs}, {"sequences", seqs}, {"warnings", warnings},
                                {"passed", ok}};
        r.text += text.str();
        r.exit_code = ok ? 0 : 1;
        return r;
    });
}

} // namespace logpot
