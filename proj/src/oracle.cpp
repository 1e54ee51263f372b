#include "ctm/oracle.hpp"

namespace ctm {

Rational exact_rational(double x) {
    if (!std::isfinite(x)) throw ContractViolation("cannot convert a non-finite value to a rational");
    if (x == 0.0) return Rational(0);
    int exponent = 0;
    const double mantissa = std::frexp(x, &exponent);
    // mantissa * 2^53 is an integer for every double.
    const auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
    exponent -= 53;
    Rational r(scaled);
    if (exponent >= 0) {
        r *= Rational(boost::multiprecision::cpp_int(1) << exponent);
    } else {
        r /= Rational(boost::multiprecision::cpp_int(1) << -exponent);
    }
    return r;
}

void write_oracle_csv(std::ostream& out, const TreeShape& shape, const CompetitionFunction& f,
                      std::span<const Chunk> leaf_chunks) {
    const auto probs = exact_win_probabilities<Rational>(shape, f, leaf_chunks);
    out << "leaf,address,f_value,exact_probability_numerator,denominator\n";
    for (std::uint32_t leaf = 0; leaf < shape.leaf_count(); ++leaf) {
        const Address a = shape.processor_at(leaf);
        const Rational& p = probs[a.id];
        out << leaf << ',' << a.id << ',' << f_eval(f, leaf_chunks[a.id]) << ','
            << boost::multiprecision::numerator(p) << ',' << boost::multiprecision::denominator(p) << '\n';
    }
}

} // namespace ctm
