#include "reynet/tableau.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <string>

#include "reynet/error.hpp"

namespace reynet {

int BasisTableau::m() const noexcept {
  int total = 0;
  for (const auto& r : rows) total += static_cast<int>(r.size());
  return total;
}

YoungDiagram BasisTableau::shape() const {
  YoungDiagram y{m(), {}};
  for (const auto& r : rows) y.rows.push_back(static_cast<int>(r.size()));
  return y;
}

bool BasisTableau::valid() const noexcept {
  const int total = m();
  if (rows.empty() || total == 0) return false;
  std::vector<char> seen(static_cast<std::size_t>(total), 0);
  for (std::size_t d = 0; d < rows.size(); ++d) {
    const auto& r = rows[d];
    if (r.empty()) return false;
    for (std::size_t w = 0; w < r.size(); ++w) {
      if (r[w] < 1 || r[w] > total || seen[static_cast<std::size_t>(r[w] - 1)]) return false;
      seen[static_cast<std::size_t>(r[w] - 1)] = 1;
      if (w > 0 && r[w - 1] >= r[w]) return false;
    }
    if (d > 0) {
      const auto& prev = rows[d - 1];
      if (prev.size() < r.size()) return false;
      if (prev.size() == r.size() && prev.front() >= r.front()) return false;
    }
  }
  return true;
}

bool ExtendedTableau::valid() const noexcept {
  if (!shape.valid() || static_cast<int>(labels.size()) != shape.depth()) return false;
  for (std::size_t a = 0; a < labels.size(); ++a) {
    if (labels[a] < 1 || labels[a] > n) return false;
    for (std::size_t b = 0; b < a; ++b)
      if (labels[a] == labels[b]) return false;
  }
  return true;
}

std::vector<YoungDiagram> enum_young_diagrams(int m) {
  if (m < 1) throw DomainError("enum_young_diagrams: m must be positive");
  std::vector<YoungDiagram> out;
  std::vector<int> rows;
  std::function<void(int, int)> rec = [&](int remaining, int cap) {
    if (remaining == 0) {
      out.push_back({m, rows});
      return;
    }
    for (int k = std::min(remaining, cap); k >= 1; --k) {
      rows.push_back(k);
      rec(remaining - k, k);
      rows.pop_back();
    }
  };
  rec(m, m);
  return out;
}

namespace {

bool row_precedes(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return a.size() > b.size();
  return a.front() < b.front();
}

std::vector<int> concatenation(const BasisTableau& t) {
  std::vector<int> c;
  for (const auto& r : t.rows) c.insert(c.end(), r.begin(), r.end());
  return c;
}

}  // namespace

std::vector<BasisTableau> enum_basis_tableaux(int m, int depth) {
  if (m < 1 || depth < 1 || depth > m) throw DomainError("enum_basis_tableaux: need 1 <= D <= m");
  std::vector<BasisTableau> out;
  // Restricted growth strings: block[l] <= 1 + max(block[0..l-1]).
  std::vector<int> block(static_cast<std::size_t>(m), 0);
  std::function<void(int, int)> rec = [&](int pos, int used) {
    if (pos == m) {
      if (used != depth) return;
      BasisTableau t;
      t.rows.assign(static_cast<std::size_t>(depth), {});
      for (int l = 0; l < m; ++l) t.rows[static_cast<std::size_t>(block[static_cast<std::size_t>(l)])].push_back(l + 1);
      std::sort(t.rows.begin(), t.rows.end(), row_precedes);
      out.push_back(std::move(t));
      return;
    }
    if (depth - used > m - pos) return;
    for (int b = 0; b <= used && b < depth; ++b) {
      block[static_cast<std::size_t>(pos)] = b;
      rec(pos + 1, std::max(used, b + 1));
    }
  };
  rec(0, 0);
  std::sort(out.begin(), out.end(),
            [](const BasisTableau& a, const BasisTableau& b) { return concatenation(a) < concatenation(b); });
  return out;
}

std::vector<BasisTableau> enum_basis_tableaux(int m) {
  std::vector<BasisTableau> out;
  for (int d = 1; d <= m; ++d) {
    auto part = enum_basis_tableaux(m, d);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::size_t tableau_index(std::span<const BasisTableau> tableaux, const BasisTableau& t) {
  const auto it = std::find(tableaux.begin(), tableaux.end(), t);
  if (it == tableaux.end()) throw DomainError("tableau not in the given set");
  return static_cast<std::size_t>(it - tableaux.begin());
}

std::vector<int> phi(const ExtendedTableau& ext) {
  if (!ext.valid()) throw DomainError("phi: malformed extended tableau");
  std::vector<int> u(static_cast<std::size_t>(ext.shape.m()), 0);
  for (std::size_t d = 0; d < ext.shape.rows.size(); ++d)
    for (int l : ext.shape.rows[d]) u[static_cast<std::size_t>(l - 1)] = ext.labels[d];
  return u;
}

std::vector<int> corner_index(const BasisTableau& t) {
  ExtendedTableau ext{t.m(), {}, t};
  for (int d = 1; d <= t.depth(); ++d) ext.labels.push_back(d);
  return phi(ext);
}

ExtendedTableau psi(std::span<const int> u, int n) {
  std::map<int, std::vector<int>> positions;
  for (std::size_t l = 0; l < u.size(); ++l) {
    if (u[l] < 1 || u[l] > n) throw DomainError("psi: entry outside [1, n]");
    positions[u[l]].push_back(static_cast<int>(l) + 1);
  }
  std::vector<std::pair<std::vector<int>, int>> rows;
  for (auto& [value, pos] : positions) rows.emplace_back(std::move(pos), value);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return row_precedes(a.first, b.first); });
  ExtendedTableau ext{n, {}, {}};
  for (auto& [pos, value] : rows) {
    ext.labels.push_back(value);
    ext.shape.rows.push_back(std::move(pos));
  }
  return ext;
}

YoungDiagram shape_of(std::span<const int> u) {
  std::map<int, int> mult;
  for (int v : u) ++mult[v];
  YoungDiagram y{static_cast<int>(u.size()), {}};
  for (const auto& [v, k] : mult) y.rows.push_back(k);
  std::sort(y.rows.begin(), y.rows.end(), std::greater<>());
  return y;
}

Normalization normalize_detailed(std::span<const int> j, int n) {
  const int depth = static_cast<int>(j.size());
  if (depth < 1 || depth > n) throw DomainError("normalize: need 1 <= |j| <= n");
  for (std::size_t a = 0; a < j.size(); ++a) {
    if (j[a] < 1 || j[a] > n) throw DomainError("normalize: entry outside [1, n]");
    for (std::size_t b = 0; b < a; ++b)
      if (j[a] == j[b]) throw DomainError("normalize: entries must be distinct");
  }
  // Track the images of j under σ_{d-1}⋯σ_1 as factors are chosen.
  std::vector<int> current(j.begin(), j.end());
  std::vector<int> exponents(static_cast<std::size_t>(depth));
  Permutation g = Permutation::identity(n);
  for (int d = 1; d <= depth; ++d) {
    const int len = n - d + 1;
    const int v = current[static_cast<std::size_t>(d - 1)];
    // c_d^p(v) = d + (v - d + p) mod len; solve for p with image d.
    const int p = (len - (v - d)) % len;
    exponents[static_cast<std::size_t>(d - 1)] = p;
    const Permutation sigma = cycle_power(n, d, p);
    for (int& c : current) c = sigma(c);
    g = compose(sigma, g);
  }
  Normalization out{std::move(g), exponents, design_index(n, depth, exponents)};
  return out;
}

}  // namespace reynet
