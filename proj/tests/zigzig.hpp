#pragma once

#include "logpot/potential.hpp"

// Annotations along the zig-zig path of splay. Slot orders:
// Q (t), Q1 (cl, cr), Q2 and Q3 (cr, bl, br), Q4 (cr, br, x).
namespace zigzig {

inline logpot::Annotation make(std::size_t arity, std::vector<logpot::Rational> ranks,
                               std::vector<std::pair<logpot::LogIndex, logpot::Rational>> logs) {
    logpot::Annotation q(arity);
    q.rank = std::move(ranks);
    for (auto& [i, c] : logs) q.log[i] = c;
    return q;
}

inline logpot::Annotation q() { return make(1, {1}, {{{{1}, 0}, 3}, {{{0}, 2}, 1}}); }
inline logpot::Annotation q_result() { return make(1, {1}, {}); }

inline logpot::Annotation q1() {
    return make(2, {1, 1}, {{{{1, 1}, 0}, 3}, {{{1, 0}, 0}, 1}, {{{0, 1}, 0}, 1}, {{{0, 0}, 2}, 1}});
}

inline logpot::Annotation q2() {
    return make(3, {1, 1, 1},
                {{{{0, 0, 0}, 2}, 1},
                 {{{1, 1, 1}, 0}, 3},
                 {{{0, 1, 1}, 0}, 1},
                 {{{1, 0, 0}, 0}, 1},
                 {{{0, 1, 0}, 0}, 1},
                 {{{0, 0, 1}, 0}, 1}});
}

inline logpot::Annotation q3() {
    return make(3, {1, 1, 1},
                {{{{0, 0, 0}, 2}, 2},
                 {{{0, 1, 0}, 0}, 3},
                 {{{0, 0, 1}, 0}, 1},
                 {{{1, 0, 0}, 0}, 1},
                 {{{1, 0, 1}, 0}, 1},
                 {{{1, 1, 1}, 0}, 1}});
}

inline logpot::Annotation q4() {
    return make(3, {1, 1, 1},
                {{{{1, 0, 0}, 0}, 1}, {{{0, 1, 0}, 0}, 1}, {{{1, 1, 0}, 0}, 1}, {{{1, 1, 1}, 0}, 1}});
}

} // namespace zigzig
