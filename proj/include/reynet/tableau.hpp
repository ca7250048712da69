#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "reynet/group.hpp"

namespace reynet {

/// Partition of m into weakly decreasing positive row lengths.
struct YoungDiagram {
  int m = 0;
  std::vector<int> rows;

  int depth() const noexcept { return static_cast<int>(rows.size()); }
  friend bool operator==(const YoungDiagram&, const YoungDiagram&) = default;
};

/// Set partition of {1..m} written as rows: each row ascending, rows ordered
/// by length descending and, among equal lengths, by first entry ascending.
struct BasisTableau {
  std::vector<std::vector<int>> rows;

  int m() const noexcept;
  int depth() const noexcept { return static_cast<int>(rows.size()); }
  YoungDiagram shape() const;
  bool valid() const noexcept;

  friend bool operator==(const BasisTableau&, const BasisTableau&) = default;
  friend auto operator<=>(const BasisTableau&, const BasisTableau&) = default;
};

/// A basis tableau with distinct labels j_1..j_D in [n] attached to its rows.
struct ExtendedTableau {
  int n = 0;
  std::vector<int> labels;
  BasisTableau shape;

  bool valid() const noexcept;
  friend bool operator==(const ExtendedTableau&, const ExtendedTableau&) = default;
};

/// Partitions of m in decreasing lexicographic order.
std::vector<YoungDiagram> enum_young_diagrams(int m);

/// Basis tableaux of depth D, lexicographic on the row concatenation.
std::vector<BasisTableau> enum_basis_tableaux(int m, int depth);

/// All basis tableaux of m: depth ascending, each depth in enum_basis_tableaux order.
/// This is the canonical indexing of component networks and corner entries.
std::vector<BasisTableau> enum_basis_tableaux(int m);

/// Index of `t` within `tableaux`; DomainError if absent.
std::size_t tableau_index(std::span<const BasisTableau> tableaux, const BasisTableau& t);

/// u_l = j_d for the row d containing l.
std::vector<int> phi(const ExtendedTableau& ext);

/// phi with labels (1..D): the corner index tuple of a basis tableau.
std::vector<int> corner_index(const BasisTableau& t);

/// Tableau representation: rows are the position sets of each distinct value.
ExtendedTableau psi(std::span<const int> u, int n);

/// Sorted multiplicities of the distinct values of u, descending.
YoungDiagram shape_of(std::span<const int> u);

struct Normalization {
  Permutation g;
  std::vector<int> exponents;  ///< (p_1..p_D) with σ_d = c_d^{p_d}
  std::size_t design_index = 0;
};

/// The unique g ∈ H_D with g·j = (1..D), built factor by factor.
/// DomainError on repeated or out-of-range entries.
Normalization normalize_detailed(std::span<const int> j, int n);

inline Permutation normalize(std::span<const int> j, int n) { return normalize_detailed(j, n).g; }

}  // namespace reynet
