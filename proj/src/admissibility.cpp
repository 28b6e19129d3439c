#include "hqe/admissibility.hpp"

#include <limits>
#include <sstream>

namespace hqe {

double normalizing_factor(int k, int l, std::span<const double> a) {
  detail::check_kl(k, l, a.size());
  if (!in_gamma_plus(a)) throw Error(ErrorCode::NotPositiveCone, "spectrum not in the positive cone");
  return std::pow(sigma(k, a) / sigma(l, a), -1.0 / static_cast<double>(k - l));
}

double c_star(int n, int k, int l) {
  detail::check_kl(k, l, static_cast<std::size_t>(n));
  auto binom = [](int top, int bottom) {
    double r = 1.0;
    for (int i = 1; i <= bottom; ++i) r = r * static_cast<double>(top - bottom + i) / static_cast<double>(i);
    return r;
  };
  return std::pow(binom(n, l) / binom(n, k), 1.0 / static_cast<double>(k - l));
}

AdmissibleMatrix classify(const SymMatrix& A, int k, int l) {
  const int n = static_cast<int>(A.size());
  detail::check_kl(k, l, A.size());
  AdmissibleMatrix out;
  out.A = A;
  out.k = k;
  out.l = l;
  out.a = eigh(A).values;
  out.c_star = c_star(n, k, l);
  out.positive = in_gamma_plus(out.a);
  out.m = std::numeric_limits<double>::quiet_NaN();
  if (out.positive) {
    out.m = m_exponent(k, l, out.a);
    out.rho = normalizing_factor(k, l, out.a.span());
    out.in_A_kl = sigma_balanced(k, l, out.a);
    out.in_Atilde_kl = out.in_A_kl && out.m > 2.0;
  }
  return out;
}

std::string AdmissibleMatrix::rejection_reason() const {
  std::ostringstream os;
  os.precision(17);
  if (!positive) {
    os << "lambda(A) is not in the positive cone (smallest eigenvalue " << a[0] << ")";
  } else if (!in_A_kl) {
    os << "sigma_" << k << "(lambda(A)) = " << sigma(k, a) << " differs from sigma_" << l
       << "(lambda(A)) = " << sigma(l, a) << "; rescale A by rho = " << rho;
    if (!(m > 2.0)) {
      os << ", although m_{" << k << "," << l << "}(lambda(A)) = " << m
         << " is scale invariant and the construction requires m > 2";
    }
  } else if (!(m > 2.0)) {
    os << "m_{" << k << "," << l << "}(lambda(A)) = " << m
       << " but the construction requires m > 2 (A is in A_{k,l} but not in A~_{k,l})";
  }
  return os.str();
}

}  // namespace hqe
