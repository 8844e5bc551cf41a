#include "ep3/braid.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "ep3/errors.hpp"

namespace ep3 {

Perm3 compose(const Perm3& first, const Perm3& then) {
  return {then[first[0]], then[first[1]], then[first[2]]};
}

Perm3 inverse(const Perm3& p) {
  Perm3 out{};
  for (int i = 0; i < 3; ++i) out[p[i]] = i;
  return out;
}

int inversion_count(const Perm3& p) {
  int n = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (p[i] > p[j]) ++n;
  return n;
}

int cycle_count(const Perm3& p) {
  std::array<bool, 3> seen{};
  int cycles = 0;
  for (int i = 0; i < 3; ++i) {
    if (seen[i]) continue;
    ++cycles;
    for (int j = i; !seen[j]; j = p[j]) seen[j] = true;
  }
  return cycles;
}

namespace {

void check_letter(int l) {
  if (l != 1 && l != -1 && l != 2 && l != -2) throw InvalidParameter("braid letter must be one of +-1, +-2");
}

Perm3 transposition(int generator) {
  Perm3 p = identity_perm;
  std::swap(p[generator - 1], p[generator]);
  return p;
}

constexpr Perm3 kDelta{2, 1, 0};

// Delta x Delta^-1 on simple elements.
Perm3 flip(const Perm3& p) { return compose(compose(kDelta, p), kDelta); }

int length(const Perm3& p) { return inversion_count(p); }

// Move the largest prefix of `b` that keeps `a` simple from b into a.
bool left_weight(Perm3& a, Perm3& b) {
  Perm3 best = identity_perm;
  int best_len = 0;
  Perm3 c = identity_perm;
  do {
    const int lc = length(c);
    if (lc <= best_len) continue;
    const Perm3 rest = compose(inverse(c), b);  // b = c * rest
    if (lc + length(rest) != length(b)) continue;
    if (length(compose(a, c)) != length(a) + lc) continue;
    best = c;
    best_len = lc;
  } while (std::next_permutation(c.begin(), c.end()));
  if (best_len == 0) return false;
  a = compose(a, best);
  b = compose(inverse(best), b);
  return true;
}

}  // namespace

BraidWord::BraidWord(std::initializer_list<int> l) : letters(l) {
  for (int x : letters) check_letter(x);
}

BraidWord::BraidWord(std::vector<int> l) : letters(std::move(l)) {
  for (int x : letters) check_letter(x);
}

std::string BraidWord::str() const {
  if (letters.empty()) return "e";
  std::ostringstream os;
  for (std::size_t i = 0; i < letters.size(); ++i) {
    if (i) os << ' ';
    os << 's' << std::abs(letters[i]);
    if (letters[i] < 0) os << "^-1";
  }
  return os.str();
}

BraidWord BraidWord::parse(std::string_view text) {
  std::vector<int> out;
  std::istringstream is{std::string(text)};
  std::string tok;
  while (is >> tok) {
    if (tok == "e") continue;
    int sign = 1;
    std::string body = tok;
    if (body.size() > 3 && body.compare(body.size() - 3, 3, "^-1") == 0) {
      sign = -1;
      body.resize(body.size() - 3);
    }
    if (body.size() != 2 || (body[0] != 's' && body[0] != 'S') || (body[1] != '1' && body[1] != '2'))
      throw ParseError("bad braid letter '" + tok + "'");
    out.push_back(sign * (body[1] - '0'));
  }
  return BraidWord(std::move(out));
}

Perm3 BraidWord::permutation() const {
  Perm3 p = identity_perm;
  for (int l : letters) p = compose(p, transposition(std::abs(l)));
  return p;
}

int BraidWord::exponent_sum() const {
  int s = 0;
  for (int l : letters) s += l > 0 ? 1 : -1;
  return s;
}

BraidWord BraidWord::inverse() const {
  std::vector<int> out(letters.rbegin(), letters.rend());
  for (int& l : out) l = -l;
  return BraidWord(std::move(out));
}

BraidWord operator*(const BraidWord& a, const BraidWord& b) {
  std::vector<int> out = a.letters;
  out.insert(out.end(), b.letters.begin(), b.letters.end());
  return BraidWord(std::move(out));
}

BraidWord free_reduce(const BraidWord& w) {
  std::vector<int> stack;
  for (int l : w.letters) {
    if (!stack.empty() && stack.back() == -l) stack.pop_back();
    else stack.push_back(l);
  }
  return BraidWord(std::move(stack));
}

std::string GarsideForm::str() const {
  std::ostringstream os;
  os << "D^" << delta_power;
  for (const auto& f : factors) os << " [" << f[0] << f[1] << f[2] << ']';
  return os.str();
}

GarsideForm normal_form(const BraidWord& w) {
  GarsideForm nf;
  std::vector<Perm3> factors;
  for (int l : w.letters) {
    const Perm3 s = transposition(std::abs(l));
    if (l > 0) {
      factors.push_back(s);
    } else {
      // x * s^-1 = Delta^-1 * flip(x) * (Delta s^-1)
      for (auto& f : factors) f = flip(f);
      --nf.delta_power;
      factors.push_back(compose(kDelta, s));  // simple c with c * s = Delta
    }
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = factors.size(); i-- > 1;)
      if (left_weight(factors[i - 1], factors[i])) changed = true;
    while (!factors.empty() && factors.front() == kDelta) {
      factors.erase(factors.begin());
      ++nf.delta_power;
      changed = true;
    }
    const auto before = factors.size();
    std::erase(factors, identity_perm);
    if (factors.size() != before) changed = true;
  }
  nf.factors = std::move(factors);
  return nf;
}

bool words_equivalent(const BraidWord& a, const BraidWord& b) { return normal_form(a) == normal_form(b); }

ClosureInvariants closure_invariants(const BraidWord& w) {
  const Perm3 p = w.permutation();
  return {p, cycle_count(p), w.exponent_sum()};
}

}  // namespace ep3
