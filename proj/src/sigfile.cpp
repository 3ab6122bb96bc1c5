#include "logpot/sigfile.hpp"

#include <cctype>
#include <sstream>

namespace logpot {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw std::invalid_argument("signature line " + std::to_string(line) + ": " + msg);
}

// Splits on `sep` outside braces.
std::vector<std::string> split_top(std::string_view s, char sep) {
    std::vector<std::string> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '{') ++depth;
        else if (s[i] == '}') --depth;
        else if (s[i] == sep && depth == 0) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    out.push_back(trim(s.substr(start)));
    return out;
}

SimpleType parse_simple(const std::string& t) {
    if (t == "B" || t == "Base") return SimpleType::Base;
    if (t == "T" || t == "Tree") return SimpleType::Tree;
    if (t == "Bool") return SimpleType::Bool;
    throw std::invalid_argument("unknown type '" + t + "'");
}

// `{ body }` at the start of s; returns the body and advances s.
std::string take_braced(std::string& s, int line) {
    s = trim(s);
    if (s.empty() || s[0] != '{') fail(line, "expected '{'");
    std::size_t close = 0;
    for (int depth = 0; close < s.size(); ++close) {
        if (s[close] == '{') ++depth;
        else if (s[close] == '}' && --depth == 0) break;
    }
    if (close == s.size()) fail(line, "missing '}'");
    std::string body = s.substr(1, close - 1);
    s = trim(s.substr(close + 1));
    return body;
}

} // namespace

FunctionType parse_function_type(std::string_view text) {
    std::string s(text);
    auto arrow = s.find("->");
    if (arrow == std::string::npos) throw std::invalid_argument("function type needs '->'");
    FunctionType ft;
    std::string params = trim(s.substr(0, arrow));
    if (!params.empty() && params != "()") {
        std::stringstream ss(params);
        std::string item;
        while (std::getline(ss, item, '*')) ft.params.push_back(parse_simple(trim(item)));
    }
    ft.result = parse_simple(trim(s.substr(arrow + 2)));
    return ft;
}

SignatureTable parse_signatures(std::string_view text) {
    SignatureTable table;
    std::stringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto comment = raw.find("--");
        std::string l = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
        if (l.empty()) continue;
        auto parts = split_top(l, '|');
        std::string head = parts[0];
        if (head.rfind("fn", 0) != 0) fail(line, "expected 'fn'");
        head = trim(head.substr(2));
        auto colon = head.find(':');
        if (colon == std::string::npos) fail(line, "expected ':' after the function name");
        AnnotatedSignature sig;
        sig.function = trim(head.substr(0, colon));
        try {
            sig.type = parse_function_type(head.substr(colon + 1));
        } catch (const std::invalid_argument& e) {
            fail(line, e.what());
        }
        std::size_t m = tree_count(sig.type.params), r = result_arity(sig.type.result);
        for (std::size_t i = 1; i < parts.size(); ++i) {
            std::string p = parts[i];
            bool costed;
            if (p.rfind("costed", 0) == 0) {
                costed = true;
                p = p.substr(6);
            } else if (p.rfind("costfree", 0) == 0) {
                costed = false;
                p = p.substr(8);
            } else {
                fail(line, "expected 'costed' or 'costfree'");
            }
            std::string q = take_braced(p, line);
            if (p.rfind("->", 0) != 0) fail(line, "expected '->' between annotations");
            p = p.substr(2);
            std::string qp = take_braced(p, line);
            if (!p.empty()) fail(line, "trailing text '" + p + "'");
            try {
                auto pair = std::make_pair(parse_annotation(q, m), parse_annotation(qp, r));
                (costed ? sig.costed : sig.cost_free).push_back(pair);
            } catch (const std::invalid_argument& e) {
                fail(line, e.what());
            }
        }
        if (table.count(sig.function)) fail(line, "duplicate signature for '" + sig.function + "'");
        table[sig.function] = sig;
    }
    return table;
}

std::string format_signature(const AnnotatedSignature& sig) {
    std::string s = "fn " + sig.function + " : " + to_string(sig.type);
    for (const auto& [q, qp] : sig.costed) s += " | costed { " + format_annotation(q) + " } -> { " + format_annotation(qp) + " }";
    for (const auto& [q, qp] : sig.cost_free)
        s += " | costfree { " + format_annotation(q) + " } -> { " + format_annotation(qp) + " }";
    return s;
}

std::string format_signatures(const SignatureTable& sigs) {
    std::string s;
    for (const auto& [name, sig] : sigs) s += format_signature(sig) + "\n";
    return s;
}

} // namespace logpot
