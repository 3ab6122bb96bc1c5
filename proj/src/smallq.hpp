#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <utility>

namespace logpot {

// Exact rational with an int64 fast path and a GMP fallback on overflow.
class SmallQ {
public:
    SmallQ() = default;
    SmallQ(std::int64_t n) : n_(n) {}
    explicit SmallQ(const mpq_class& q) { assign(q); }

    SmallQ(const SmallQ& o) : n_(o.n_), d_(o.d_), big_(o.big_ ? std::make_unique<mpq_class>(*o.big_) : nullptr) {}
    SmallQ(SmallQ&&) noexcept = default;
    SmallQ& operator=(const SmallQ& o) {
        if (this != &o) {
            n_ = o.n_;
            d_ = o.d_;
            big_ = o.big_ ? std::make_unique<mpq_class>(*o.big_) : nullptr;
        }
        return *this;
    }
    SmallQ& operator=(SmallQ&&) noexcept = default;

    mpq_class to_mpq() const {
        if (big_) return *big_;
        mpq_class q;
        set_si64(q.get_num_mpz_t(), n_);
        set_si64(q.get_den_mpz_t(), d_);
        return q;
    }

    int sign() const {
        if (big_) return sgn(*big_);
        return (n_ > 0) - (n_ < 0);
    }
    bool is_one() const { return !big_ && n_ == 1 && d_ == 1; }

    friend SmallQ operator*(const SmallQ& a, const SmallQ& b) {
        if (!a.big_ && !b.big_) {
            if (a.n_ == 0 || b.n_ == 0) return SmallQ();
            return from128(I(a.n_) * b.n_, I(a.d_) * b.d_);
        }
        return SmallQ(mpq_class(a.to_mpq() * b.to_mpq()));
    }
    friend SmallQ operator/(const SmallQ& a, const SmallQ& b) {
        if (!a.big_ && !b.big_) {
            I n = I(a.n_) * b.d_, d = I(a.d_) * b.n_;
            if (d < 0) {
                n = -n;
                d = -d;
            }
            return from128(n, d);
        }
        return SmallQ(mpq_class(a.to_mpq() / b.to_mpq()));
    }
    friend SmallQ operator+(const SmallQ& a, const SmallQ& b) {
        if (!a.big_ && !b.big_) {
            if (a.d_ == 1 && b.d_ == 1) return from128(I(a.n_) + b.n_, 1);
            return from128(I(a.n_) * b.d_ + I(b.n_) * a.d_, I(a.d_) * b.d_);
        }
        return SmallQ(mpq_class(a.to_mpq() + b.to_mpq()));
    }
    friend SmallQ operator-(const SmallQ& a) {
        if (a.big_) return SmallQ(mpq_class(-*a.big_));
        if (a.n_ == INT64_MIN) return SmallQ(mpq_class(-a.to_mpq()));
        SmallQ r;
        r.n_ = -a.n_;
        r.d_ = a.d_;
        return r;
    }
    friend SmallQ operator-(const SmallQ& a, const SmallQ& b) { return a + (-b); }
    SmallQ& operator+=(const SmallQ& o) { return *this = *this + o; }
    SmallQ& operator-=(const SmallQ& o) { return *this = *this - o; }
    SmallQ& operator*=(const SmallQ& o) { return *this = *this * o; }

    friend int compare(const SmallQ& a, const SmallQ& b) {
        if (!a.big_ && !b.big_) {
            I l = I(a.n_) * b.d_, r = I(b.n_) * a.d_;
            return (l > r) - (l < r);
        }
        return cmp(a.to_mpq(), b.to_mpq());
    }
    friend bool operator<(const SmallQ& a, const SmallQ& b) { return compare(a, b) < 0; }
    friend bool operator==(const SmallQ& a, const SmallQ& b) { return compare(a, b) == 0; }
    friend bool operator!=(const SmallQ& a, const SmallQ& b) { return compare(a, b) != 0; }

private:
    using I = __int128;
    using U = unsigned __int128;

    std::int64_t n_ = 0, d_ = 1;
    std::unique_ptr<mpq_class> big_;

    static void set_si64(mpz_t z, std::int64_t v) {
        std::uint64_t m = v < 0 ? ~std::uint64_t(v) + 1 : std::uint64_t(v);
        mpz_import(z, 1, 1, sizeof(m), 0, 0, &m);
        if (v < 0) mpz_neg(z, z);
    }

    static U gcd(U a, U b) {
        if (a == 0) return b;
        if (b == 0) return a;
        int s = 0;
        while (((a | b) & 1) == 0) {
            a >>= 1;
            b >>= 1;
            ++s;
        }
        while ((a & 1) == 0) a >>= 1;
        do {
            while ((b & 1) == 0) b >>= 1;
            if (a > b) std::swap(a, b);
            b -= a;
        } while (b != 0);
        return a << s;
    }

    static void set_128(mpz_t z, I v) {
        U m = v < 0 ? U(-(v + 1)) + 1 : U(v);
        std::uint64_t words[2] = {std::uint64_t(m), std::uint64_t(m >> 64)};
        mpz_import(z, 2, -1, sizeof(std::uint64_t), 0, 0, words);
        if (v < 0) mpz_neg(z, z);
    }

    // d > 0
    static SmallQ from128(I n, I d) {
        SmallQ r;
        if (n == 0) return r;
        if (d != 1) {
            U g = gcd(n < 0 ? U(-(n + 1)) + 1 : U(n), U(d));
            if (g != 1) {
                n /= I(g);
                d /= I(g);
            }
        }
        if (n >= INT64_MIN + 1 && n <= INT64_MAX && d <= INT64_MAX) {
            r.n_ = std::int64_t(n);
            r.d_ = std::int64_t(d);
            return r;
        }
        mpq_class q;
        set_128(q.get_num_mpz_t(), n);
        set_128(q.get_den_mpz_t(), d);
        r.assign(q);
        return r;
    }

    void assign(const mpq_class& q) {
        if (mpz_sizeinbase(q.get_num_mpz_t(), 2) < 63 && mpz_sizeinbase(q.get_den_mpz_t(), 2) < 63) {
            n_ = mpz_get_si(q.get_num_mpz_t());
            d_ = mpz_get_si(q.get_den_mpz_t());
            big_.reset();
        } else {
            n_ = 0;
            d_ = 1;
            big_ = std::make_unique<mpq_class>(q);
        }
    }
};

} // namespace logpot
