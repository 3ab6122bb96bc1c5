#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "logpot.h"

namespace {

struct Session {
    logpot_session* s = nullptr;
    Session() {
        if (logpot_session_create(&s) != LOGPOT_OK) throw std::runtime_error("cannot create session");
    }
    ~Session() { logpot_session_destroy(s); }
};

int emit(const Session& session, logpot_status st, const std::string& json_out) {
    if (st == LOGPOT_INTERNAL_ERROR || st == LOGPOT_INVALID_HANDLE) {
        std::cerr << "internal error: " << logpot_last_error(session.s) << "\n";
        return 2;
    }
    std::string text = logpot_report_text(session.s);
    (st == LOGPOT_INPUT_ERROR ? std::cerr : std::cout) << text;
    if (!json_out.empty()) {
        std::ofstream out(json_out, std::ios::binary);
        if (!out || !(out << logpot_report_json(session.s) << "\n")) {
            std::cerr << "error: cannot write '" << json_out << "'\n";
            return 2;
        }
    }
    return int(st);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Logarithmic amortised cost analysis for tree programs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(logpot_version()));

    std::string tmpl, json_out, let_constants, corpus = "exhaustive", sig_out;
    std::uint64_t fuel = 1'000'000, seed = 1;
    std::size_t max_leaves = 12, count = 1000, sequences = 100, seq_length = 256, seq_leaves = 64;
    long key_limit = -1;
    unsigned threads = 0;
    bool force = false;
    std::vector<std::string> functions;

    auto common = [&](CLI::App* c) {
        c->add_option("--template", tmpl, "Index template, e.g. a=0..1,b=0..2");
        c->add_option("--json", json_out, "Write the JSON report to this file");
        c->add_option("--let-constants", let_constants, "Constant potential at lets: shared or split")
            ->check(CLI::IsMember({"shared", "split"}));
    };

    std::string program, sigfile, function;
    std::vector<std::string> args;

    auto* check = app.add_subcommand("check", "Certify a program against a signature file");
    check->add_option("program", program, "Program file")->required();
    check->add_option("signature", sigfile, "Signature file")->required();
    common(check);

    auto* infer = app.add_subcommand("infer", "Infer signatures and write a .sig file");
    infer->add_option("program", program, "Program file")->required();
    infer->add_option("--function", functions, "Infer only for these functions and their callees");
    infer->add_option("--out", sig_out, "Signature output file");
    common(infer);

    auto* eval = app.add_subcommand("eval", "Run a function and report its value and cost");
    eval->add_option("program", program, "Program file")->required();
    eval->add_option("function", function, "Function name")->required();
    eval->add_option("args", args, "Argument values");
    eval->add_option("--fuel", fuel, "Maximum number of applications");
    eval->add_option("--json", json_out, "Write the JSON report to this file");

    auto* validate = app.add_subcommand("validate", "Test a signature against measured costs");
    validate->add_option("program", program, "Program file")->required();
    validate->add_option("signature", sigfile, "Signature file")->required();
    validate->add_option("--corpus", corpus, "exhaustive or random")->check(CLI::IsMember({"exhaustive", "random"}));
    validate->add_option("--max-leaves", max_leaves, "Largest tree size in leaves");
    validate->add_option("--count", count, "Number of random trees");
    validate->add_option("--key-limit", key_limit, "Probe keys 0..N instead of the labels of each tree");
    validate->add_option("--seed", seed, "Random seed");
    validate->add_option("--fuel", fuel, "Maximum number of applications per run");
    validate->add_option("--threads", threads, "Worker threads, 0 for all cores");
    validate->add_option("--sequences", sequences, "Number of operation sequences");
    validate->add_option("--sequence-length", seq_length, "Operations per sequence");
    validate->add_option("--sequence-leaves", seq_leaves, "Leaves of each sequence's initial tree");
    validate->add_flag("--force", force, "Skip certification");
    common(validate);

    CLI11_PARSE(app, argc, argv);

    try {
        Session session;
        auto set = [&](const char* key, const std::string& value) {
            if (logpot_set_option(session.s, key, value.c_str()) != LOGPOT_OK)
                throw CLI::ValidationError(std::string("--") + key, logpot_last_error(session.s));
        };
        if (!tmpl.empty()) set("template", tmpl);
        if (!let_constants.empty()) set("let-constants", let_constants);
        set("fuel", std::to_string(fuel));
        set("seed", std::to_string(seed));

        if (*check) return emit(session, logpot_check(session.s, program.c_str(), sigfile.c_str()), json_out);
        if (*infer) {
            for (const auto& f : functions) set("function", f);
            if (!sig_out.empty()) set("sig-out", sig_out);
            return emit(session, logpot_infer(session.s, program.c_str()), json_out);
        }
        if (*eval) {
            std::vector<const char*> argv_c;
            for (const auto& a : args) argv_c.push_back(a.c_str());
            return emit(session,
                        logpot_eval(session.s, program.c_str(), function.c_str(), argv_c.data(), argv_c.size()),
                        json_out);
        }
        set("corpus", corpus);
        set("max-leaves", std::to_string(max_leaves));
        set("count", std::to_string(count));
        if (key_limit >= 0) set("key-limit", std::to_string(key_limit));
        set("threads", std::to_string(threads));
        set("sequences", std::to_string(sequences));
        set("sequence-length", std::to_string(seq_length));
        set("sequence-leaves", std::to_string(seq_leaves));
        set("force", force ? "1" : "0");
        return emit(session, logpot_validate(session.s, program.c_str(), sigfile.c_str()), json_out);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
