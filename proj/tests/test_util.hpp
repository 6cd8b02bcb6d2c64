#pragma once

#include <sojourn/scalar.hpp>

// mpq_class(n, d) is not reduced
inline sojourn::Rational q(long n, long d = 1)
{
    sojourn::Rational v(n, d);
    v.canonicalize();
    return v;
}
