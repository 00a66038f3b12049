#include "hsense/maps.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace hsense {

namespace {

void check_index_range(const std::vector<int>& idx, int m, const char* who) {
  std::vector<char> seen(m, 0);
  for (int v : idx) {
    if (v < 0 || v >= m) throw std::invalid_argument(std::string(who) + ": index out of range");
    if (seen[v]) throw std::invalid_argument(std::string(who) + ": indices not distinct");
    seen[v] = 1;
  }
}

void check_signs(const std::vector<int>& s, const char* who) {
  for (int v : s)
    if (v != 1 && v != -1) throw std::invalid_argument(std::string(who) + ": signs must be +1/-1");
}

std::uint64_t falling_factorial(int m, int r) {
  // m * (m-1) * ... * (m-r+1), with overflow guard (desk scale keeps this small)
  std::uint64_t acc = 1;
  for (int i = 0; i < r; ++i) {
    const std::uint64_t f = static_cast<std::uint64_t>(m - i);
    if (acc > (~std::uint64_t{0}) / f) throw std::overflow_error("family cardinality overflows");
    acc *= f;
  }
  return acc;
}

/// Lexicographic unranking of an r-arrangement of {0,...,m-1}.
std::vector<int> unrank_arrangement(int m, int r, std::uint64_t rank) {
  std::vector<int> pool(m);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> out;
  out.reserve(r);
  for (int pos = 0; pos < r; ++pos) {
    const std::uint64_t block = falling_factorial(m - pos - 1, r - pos - 1);
    const std::uint64_t digit = rank / block;
    rank %= block;
    out.push_back(pool[digit]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(digit));
  }
  return out;
}

std::vector<int> unrank_signs(int r, std::uint64_t rank) {
  // +1 sorts before -1, so rank 0 is the all-plus pattern.
  std::vector<int> s(r);
  for (int i = 0; i < r; ++i) s[i] = ((rank >> (r - 1 - i)) & 1u) ? -1 : 1;
  return s;
}

}  // namespace

LinearMap LinearMap::permutation(std::vector<int> perm) {
  const int m = static_cast<int>(perm.size());
  if (m == 0) throw std::invalid_argument("permutation: empty");
  check_index_range(perm, m, "permutation");
  LinearMap t;
  t.kind_ = MapKind::Permutation;
  t.source_dim_ = t.target_dim_ = m;
  t.indices_ = std::move(perm);
  return t;
}

LinearMap LinearMap::selection(int m, std::vector<int> rows) {
  if (m <= 0 || rows.empty() || static_cast<int>(rows.size()) > m)
    throw std::invalid_argument("selection: bad sizes");
  check_index_range(rows, m, "selection");
  LinearMap t;
  t.kind_ = MapKind::Selection;
  t.source_dim_ = m;
  t.target_dim_ = static_cast<int>(rows.size());
  t.indices_ = std::move(rows);
  return t;
}

LinearMap LinearMap::sign_map(std::vector<int> signs) {
  const int m = static_cast<int>(signs.size());
  if (m == 0) throw std::invalid_argument("sign_map: empty");
  check_signs(signs, "sign_map");
  LinearMap t;
  t.kind_ = MapKind::Sign;
  t.source_dim_ = t.target_dim_ = m;
  t.signs_ = std::move(signs);
  t.indices_.resize(m);
  std::iota(t.indices_.begin(), t.indices_.end(), 0);
  return t;
}

LinearMap LinearMap::signed_selection(int m, std::vector<int> rows, std::vector<int> signs) {
  if (rows.size() != signs.size())
    throw std::invalid_argument("signed_selection: rows/signs size mismatch");
  check_index_range(rows, m, "signed_selection");
  check_signs(signs, "signed_selection");
  LinearMap t;
  t.kind_ = MapKind::SignedSelection;
  t.source_dim_ = m;
  t.target_dim_ = static_cast<int>(rows.size());
  t.indices_ = std::move(rows);
  t.signs_ = std::move(signs);
  return t;
}

LinearMap LinearMap::explicit_matrix(MatR t) {
  require_finite(t, "explicit_matrix");
  LinearMap lm;
  lm.kind_ = MapKind::Explicit;
  lm.source_dim_ = static_cast<int>(t.cols());
  lm.target_dim_ = static_cast<int>(t.rows());
  lm.dense_ = std::move(t);
  return lm;
}

const MatR& LinearMap::sensing() const {
  if (!sensing_) throw std::logic_error("LinearMap: not composed with a sensing matrix");
  return *sensing_;
}

std::pair<int, int> LinearMap::row_action(int k) const {
  switch (kind_) {
    case MapKind::Permutation:
    case MapKind::Selection:
      return {indices_[k], 1};
    case MapKind::Sign:
      return {k, signs_[k]};
    case MapKind::SignedSelection:
      return {indices_[k], signs_[k]};
    default:
      throw std::logic_error("row_action: explicit map has no structured rows");
  }
}

int LinearMap::structured_rank(const Tolerance& tol) const {
  if (kind_ == MapKind::Explicit) return static_cast<int>(rank_tol(dense_, tol));
  return target_dim_;  // rows are distinct standard basis vectors
}

LinearMap LinearMap::composed_with(std::shared_ptr<const MatR> a) const {
  if (!a) throw std::invalid_argument("composed_with: null sensing matrix");
  if (a->rows() != source_dim_)
    throw std::invalid_argument("composed_with: sensing matrix rows must match source dim");
  LinearMap t = *this;
  t.sensing_ = std::move(a);
  return t;
}

MatR LinearMap::structured_matrix() const {
  if (kind_ == MapKind::Explicit) return dense_;
  MatR t = MatR::Zero(target_dim_, source_dim_);
  for (int k = 0; k < target_dim_; ++k) {
    auto [col, sgn] = row_action(k);
    t(k, col) = sgn;
  }
  return t;
}

MatR LinearMap::matrix() const {
  if (!sensing_) return structured_matrix();
  if (kind_ == MapKind::Explicit) return dense_ * (*sensing_);
  // structured rows just pick (signed) rows of A
  MatR out(target_dim_, sensing_->cols());
  for (int k = 0; k < target_dim_; ++k) {
    auto [row, sgn] = row_action(k);
    out.row(k) = sgn * sensing_->row(row);
  }
  return out;
}

VecR LinearMap::apply(const VecR& x) const {
  if (x.size() != input_dim()) throw std::invalid_argument("apply: dimension mismatch");
  if (sensing_) {
    VecR ax = (*sensing_) * x;
    LinearMap raw = *this;
    raw.sensing_.reset();
    return raw.apply(ax);
  }
  if (kind_ == MapKind::Explicit) return dense_ * x;
  VecR y(target_dim_);
  for (int k = 0; k < target_dim_; ++k) {
    auto [col, sgn] = row_action(k);
    y(k) = sgn * x(col);
  }
  return y;
}

std::string LinearMap::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case MapKind::Permutation: os << "perm:"; break;
    case MapKind::Selection: os << "sel:" << source_dim_ << ":"; break;
    case MapKind::Sign: os << "sign:"; break;
    case MapKind::SignedSelection: os << "selsign:" << source_dim_ << ":"; break;
    case MapKind::Explicit: os << "explicit[" << target_dim_ << "x" << source_dim_ << "]"; break;
  }
  if (kind_ == MapKind::Permutation || kind_ == MapKind::Selection ||
      kind_ == MapKind::SignedSelection) {
    for (std::size_t i = 0; i < indices_.size(); ++i) os << (i ? "," : "") << indices_[i];
  }
  if (kind_ == MapKind::SignedSelection) os << ":";
  if (kind_ == MapKind::Sign || kind_ == MapKind::SignedSelection) {
    for (std::size_t i = 0; i < signs_.size(); ++i)
      os << (i ? "," : "") << (signs_[i] > 0 ? "+" : "-");
  }
  if (sensing_) os << "*A";
  return os.str();
}

MatR extend_square(const MatR& t) {
  const Index n = std::max(t.rows(), t.cols());
  MatR out = MatR::Zero(n, n);
  out.topLeftCorner(t.rows(), t.cols()) = t;
  return out;
}

MatC extend_square_c(const MatC& t) {
  const Index n = std::max(t.rows(), t.cols());
  MatC out = MatC::Zero(n, n);
  out.topLeftCorner(t.rows(), t.cols()) = t;
  return out;
}

MapFamily MapFamily::permutations(int m) {
  if (m <= 0) throw std::invalid_argument("permutations: m must be positive");
  MapFamily f;
  f.kind_ = FamilyKind::Permutations;
  f.m_ = f.r_ = m;
  return f;
}

MapFamily MapFamily::selections(int r, int m) {
  if (m <= 0 || r <= 0 || r > m) throw std::invalid_argument("selections: need 0 < r <= m");
  MapFamily f;
  f.kind_ = FamilyKind::Selections;
  f.m_ = m;
  f.r_ = r;
  return f;
}

MapFamily MapFamily::signs(int m) {
  if (m <= 0 || m > 62) throw std::invalid_argument("signs: need 0 < m <= 62");
  MapFamily f;
  f.kind_ = FamilyKind::Signs;
  f.m_ = f.r_ = m;
  return f;
}

MapFamily MapFamily::signed_selections(int r, int m) {
  if (m <= 0 || r <= 0 || r > m || r > 62)
    throw std::invalid_argument("signed_selections: need 0 < r <= m");
  MapFamily f;
  f.kind_ = FamilyKind::SignedSelections;
  f.m_ = m;
  f.r_ = r;
  return f;
}

MapFamily MapFamily::explicit_list(std::vector<LinearMap> maps) {
  if (maps.empty()) throw std::invalid_argument("explicit_list: empty family");
  for (const auto& t : maps)
    if (t.input_dim() != maps.front().input_dim() || t.target_dim() != maps.front().target_dim())
      throw std::invalid_argument("explicit_list: members must share dimensions");
  MapFamily f;
  f.kind_ = FamilyKind::List;
  f.m_ = maps.front().input_dim();
  f.r_ = maps.front().target_dim();
  f.list_ = std::move(maps);
  return f;
}

MapFamily MapFamily::composed_with(MatR a) const {
  if (a.rows() != m_)
    throw std::invalid_argument("MapFamily::composed_with: A must have m rows");
  MapFamily f = *this;
  f.sensing_ = std::make_shared<const MatR>(std::move(a));
  if (f.kind_ == FamilyKind::List)
    for (auto& t : f.list_) t = t.composed_with(f.sensing_);
  return f;
}

int MapFamily::input_dim() const {
  if (sensing_) return static_cast<int>(sensing_->cols());
  return kind_ == FamilyKind::List ? list_.front().input_dim() : m_;
}

int MapFamily::output_dim() const {
  switch (kind_) {
    case FamilyKind::Permutations:
    case FamilyKind::Signs: return m_;
    case FamilyKind::Selections:
    case FamilyKind::SignedSelections: return r_;
    case FamilyKind::List: return list_.front().target_dim();
  }
  return 0;
}

std::uint64_t MapFamily::cardinality() const {
  switch (kind_) {
    case FamilyKind::Permutations: return falling_factorial(m_, m_);
    case FamilyKind::Selections: return falling_factorial(m_, r_);
    case FamilyKind::Signs: return std::uint64_t{1} << m_;
    case FamilyKind::SignedSelections: {
      const std::uint64_t sel = falling_factorial(m_, r_);
      const std::uint64_t two = std::uint64_t{1} << r_;
      if (sel > (~std::uint64_t{0}) / two) throw std::overflow_error("cardinality overflows");
      return sel * two;
    }
    case FamilyKind::List: return list_.size();
  }
  return 0;
}

LinearMap MapFamily::at(std::uint64_t index) const {
  if (index >= cardinality()) throw std::out_of_range("MapFamily::at: index beyond cardinality");
  LinearMap t;
  switch (kind_) {
    case FamilyKind::Permutations:
      t = LinearMap::permutation(unrank_arrangement(m_, m_, index));
      break;
    case FamilyKind::Selections:
      t = LinearMap::selection(m_, unrank_arrangement(m_, r_, index));
      break;
    case FamilyKind::Signs:
      t = LinearMap::sign_map(unrank_signs(m_, index));
      break;
    case FamilyKind::SignedSelections: {
      const std::uint64_t two = std::uint64_t{1} << r_;
      t = LinearMap::signed_selection(m_, unrank_arrangement(m_, r_, index / two),
                                      unrank_signs(r_, index % two));
      break;
    }
    case FamilyKind::List:
      return list_[index];  // already composed if the family is
  }
  if (sensing_) t = t.composed_with(sensing_);
  return t;
}

std::vector<LinearMap> MapFamily::enumerate(std::uint64_t cap) const {
  const std::uint64_t card = cardinality();
  if (card > cap) throw FamilyCapExceeded(card, cap);
  std::vector<LinearMap> out;
  out.reserve(card);
  for (std::uint64_t i = 0; i < card; ++i) out.push_back(at(i));
  return out;
}

LinearMap MapFamily::sample_one(Rng& rng) const { return at(rng.uniform_below(cardinality())); }

std::vector<LinearMap> MapFamily::sample(std::uint64_t seed, int count) const {
  if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
  Rng rng(seed);
  std::vector<LinearMap> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(sample_one(rng));
  return out;
}

std::string MapFamily::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case FamilyKind::Permutations: os << "perm:" << m_; break;
    case FamilyKind::Selections: os << "sel:" << r_ << "," << m_; break;
    case FamilyKind::Signs: os << "sign:" << m_; break;
    case FamilyKind::SignedSelections: os << "selsign:" << r_ << "," << m_; break;
    case FamilyKind::List: os << "list[" << list_.size() << "]"; break;
  }
  if (sensing_) os << "*A";
  return os.str();
}

MatR random_sensing_matrix(Index m, Index n, std::uint64_t seed) {
  Rng rng(seed);
  return random_matrix(m, n, rng);
}

SubspaceR random_subspace(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  return random_subspace_of<Real>(n, d, rng);
}

ArrangementR random_arrangement(const std::vector<int>& dims, Index n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SubspaceR> parts;
  parts.reserve(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i)
    parts.push_back(random_subspace_of<Real>(n, dims[i], rng));
  return ArrangementR(std::move(parts));
}

namespace {

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "+") out.push_back(1);
    else if (item == "-") out.push_back(-1);
    else out.push_back(std::stoi(item));
  }
  return out;
}

}  // namespace

MapFamily parse_family(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("family spec: missing ':'");
  const std::string head = text.substr(0, colon);
  const std::vector<int> args = parse_int_list(text.substr(colon + 1));
  if (head == "perm" && args.size() == 1) return MapFamily::permutations(args[0]);
  if (head == "sign" && args.size() == 1) return MapFamily::signs(args[0]);
  if (head == "sel" && args.size() == 2) return MapFamily::selections(args[0], args[1]);
  if (head == "selsign" && args.size() == 2) return MapFamily::signed_selections(args[0], args[1]);
  throw std::invalid_argument("family spec: expected perm:m, sel:r,m, sign:m or selsign:r,m");
}

LinearMap parse_map(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("map spec: missing ':'");
  const std::string head = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  if (head == "perm") return LinearMap::permutation(parse_int_list(rest));
  if (head == "sign") return LinearMap::sign_map(parse_int_list(rest));
  if (head == "sel") {
    const auto c2 = rest.find(':');
    if (c2 == std::string::npos) throw std::invalid_argument("map spec: sel:m:rows");
    return LinearMap::selection(std::stoi(rest.substr(0, c2)),
                                parse_int_list(rest.substr(c2 + 1)));
  }
  if (head == "selsign") {
    const auto c2 = rest.find(':');
    const auto c3 = rest.find(':', c2 + 1);
    if (c2 == std::string::npos || c3 == std::string::npos)
      throw std::invalid_argument("map spec: selsign:m:rows:signs");
    return LinearMap::signed_selection(std::stoi(rest.substr(0, c2)),
                                       parse_int_list(rest.substr(c2 + 1, c3 - c2 - 1)),
                                       parse_int_list(rest.substr(c3 + 1)));
  }
  throw std::invalid_argument("map spec: unknown kind '" + head + "'");
}

}  // namespace hsense
