#include "logpot.h"

#include <charconv>
#include <string>

#include "logpot/driver.hpp"

struct logpot_session {
    logpot::DriverOptions opts;
    std::string text;
    std::string json;
    std::string error;
};

namespace {

template <class T>
bool parse_number(const char* s, T& out) {
    std::string_view v(s);
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    return ec == std::errc() && p == v.data() + v.size();
}

logpot_status fail(logpot_session* s, logpot_status st, const std::string& msg) {
    s->error = msg;
    s->text.clear();
    s->json.clear();
    return st;
}

template <class F>
logpot_status run(logpot_session* s, F body) {
    if (!s) return LOGPOT_INVALID_HANDLE;
    try {
        logpot::Report r = body();
        s->text = r.text;
        s->json = r.json.dump(2);
        s->error = r.json.contains("error") ? r.json["error"].get<std::string>() : std::string();
        return logpot_status(r.exit_code);
    } catch (const std::exception& e) {
        return fail(s, LOGPOT_INTERNAL_ERROR, e.what());
    } catch (...) {
        return fail(s, LOGPOT_INTERNAL_ERROR, "unknown error");
    }
}

} // namespace

extern "C" {

const char* logpot_version(void) { return "1.0.0"; }

const char* logpot_status_string(logpot_status status) {
    switch (status) {
    case LOGPOT_OK: return "ok";
    case LOGPOT_NEGATIVE: return "negative verdict";
    case LOGPOT_INPUT_ERROR: return "input error";
    case LOGPOT_INVALID_HANDLE: return "invalid handle";
    case LOGPOT_INTERNAL_ERROR: return "internal error";
    }
    return "unknown status";
}

logpot_status logpot_session_create(logpot_session** out) {
    if (!out) return LOGPOT_INVALID_HANDLE;
    try {
        *out = new logpot_session();
        return LOGPOT_OK;
    } catch (...) {
        *out = nullptr;
        return LOGPOT_INTERNAL_ERROR;
    }
}

void logpot_session_destroy(logpot_session* session) { delete session; }

logpot_status logpot_set_option(logpot_session* s, const char* key, const char* value) {
    if (!s) return LOGPOT_INVALID_HANDLE;
    if (!key || !value) return fail(s, LOGPOT_INPUT_ERROR, "option key and value are required");
    std::string k(key), v(value);
    auto& o = s->opts;
    auto bad = [&] { return fail(s, LOGPOT_INPUT_ERROR, "invalid value '" + v + "' for option '" + k + "'"); };
    try {
        if (k == "template") {
            o.tmpl = logpot::parse_template(v);
        } else if (k == "fuel") {
            if (!parse_number(value, o.fuel) || o.fuel == 0) return bad();
        } else if (k == "seed") {
            if (!parse_number(value, o.seed)) return bad();
            o.corpus.seed = o.seed;
        } else if (k == "let-constants") {
            if (v == "shared") o.let_constants = logpot::LetConstants::Shared;
            else if (v == "split") o.let_constants = logpot::LetConstants::Split;
            else return bad();
        } else if (k == "corpus") {
            if (v == "exhaustive") o.corpus.generator = logpot::CorpusSpec::Generator::Exhaustive;
            else if (v == "random") o.corpus.generator = logpot::CorpusSpec::Generator::Random;
            else return bad();
        } else if (k == "max-leaves") {
            if (!parse_number(value, o.corpus.max_leaves)) return bad();
        } else if (k == "count") {
            if (!parse_number(value, o.corpus.count)) return bad();
        } else if (k == "key-limit") {
            std::int64_t x;
            if (!parse_number(value, x) || x < 0) return bad();
            o.corpus.key_limit = x;
        } else if (k == "force") {
            if (v != "0" && v != "1") return bad();
            o.force = v == "1";
        } else if (k == "function") {
            o.roots.push_back(v);
        } else if (k == "sig-out") {
            o.sig_out = v;
        } else if (k == "threads") {
            if (!parse_number(value, o.threads)) return bad();
        } else if (k == "sequences") {
            if (!parse_number(value, o.sequences)) return bad();
        } else if (k == "sequence-length") {
            if (!parse_number(value, o.sequence_length)) return bad();
        } else if (k == "sequence-leaves") {
            if (!parse_number(value, o.sequence_leaves)) return bad();
        } else {
            return fail(s, LOGPOT_INPUT_ERROR, "unknown option '" + k + "'");
        }
    } catch (const std::exception& e) {
        return fail(s, LOGPOT_INPUT_ERROR, e.what());
    }
    s->error.clear();
    return LOGPOT_OK;
}

logpot_status logpot_check(logpot_session* s, const char* program_file, const char* sig_file) {
    if (s && (!program_file || !sig_file)) return fail(s, LOGPOT_INPUT_ERROR, "check needs a program and a signature file");
    return run(s, [&] { return logpot::cmd_check(program_file, sig_file, s->opts); });
}

logpot_status logpot_infer(logpot_session* s, const char* program_file) {
    if (s && !program_file) return fail(s, LOGPOT_INPUT_ERROR, "infer needs a program file");
    return run(s, [&] { return logpot::cmd_infer(program_file, s->opts); });
}

logpot_status logpot_eval(logpot_session* s, const char* program_file, const char* function, const char* const* args,
                          size_t nargs) {
    if (s && (!program_file || !function || (nargs && !args)))
        return fail(s, LOGPOT_INPUT_ERROR, "eval needs a program, a function and its arguments");
    return run(s, [&] {
        std::vector<std::string> a;
        for (size_t i = 0; i < nargs; ++i) a.emplace_back(args[i] ? args[i] : "");
        return logpot::cmd_eval(program_file, function, a, s->opts);
    });
}

logpot_status logpot_validate(logpot_session* s, const char* program_file, const char* sig_file) {
    if (s && (!program_file || !sig_file))
        return fail(s, LOGPOT_INPUT_ERROR, "validate needs a program and a signature file");
    return run(s, [&] { return logpot::cmd_validate(program_file, sig_file, s->opts); });
}

const char* logpot_report_text(const logpot_session* s) { return s ? s->text.c_str() : ""; }
const char* logpot_report_json(const logpot_session* s) { return s ? s->json.c_str() : ""; }
const char* logpot_last_error(const logpot_session* s) { return s ? s->error.c_str() : "invalid handle"; }

} // extern "C"
