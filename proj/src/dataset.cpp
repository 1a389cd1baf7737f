#include "dcfair/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "dcfair/prng.hpp"

namespace dcfair {

namespace {

// Remaps arbitrary integer codes to contiguous 1..G preserving the sorted
// order of the raw codes. Throws if fewer than 2 distinct codes occur.
std::vector<int> remap_group_codes(const std::vector<long long>& raw) {
  std::set<long long> distinct(raw.begin(), raw.end());
  if (distinct.size() < 2) {
    throw DataError("fewer than 2 groups present in the data");
  }
  std::map<long long, int> code_to_id;
  int next_id = 1;
  for (long long c : distinct) code_to_id[c] = next_id++;
  std::vector<int> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = code_to_id[raw[i]];
  return out;
}

double remap_label(double raw, const std::string& where) {
  if (raw == 1.0 || raw == -1.0) return raw;
  if (raw == 0.0) return -1.0;  // {0,1} convention
  throw DataError("non-binary label " + std::to_string(raw) + " at " + where);
}

double parse_double(const std::string& tok, const std::string& where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw DataError("cannot parse number '" + tok + "' at " + where);
  }
}

}  // namespace

Dataset::Dataset(std::vector<double> features, int d, std::vector<double> labels,
                 std::vector<int> groups, std::vector<std::string> feature_names)
    : features_(std::move(features)),
      d_(d),
      labels_(std::move(labels)),
      groups_(std::move(groups)),
      feature_names_(std::move(feature_names)) {
  const std::size_t n = labels_.size();
  if (n == 0) throw DataError("empty dataset");
  if (d_ <= 0) throw DataError("feature dimension must be positive");
  if (features_.size() != n * static_cast<std::size_t>(d_)) {
    throw DataError("feature matrix size does not match n*d");
  }
  if (groups_.size() != n) throw DataError("group vector length mismatch");
  for (double v : features_) {
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
  }
  for (double z : labels_) {
    if (z != 1.0 && z != -1.0) throw DataError("labels must be +1/-1");
  }
  int max_g = 0;
  for (int g : groups_) {
    if (g < 1) throw DataError("group ids must be >= 1");
    max_g = std::max(max_g, g);
  }
  std::vector<char> seen(static_cast<std::size_t>(max_g) + 1, 0);
  for (int g : groups_) seen[g] = 1;
  for (int g = 1; g <= max_g; ++g) {
    if (!seen[g]) throw DataError("group id " + std::to_string(g) + " missing");
  }
  if (max_g < 2) throw DataError("fewer than 2 groups present in the data");
  num_groups_ = max_g;
  if (!feature_names_.empty() &&
      feature_names_.size() != static_cast<std::size_t>(d_)) {
    throw DataError("feature_names length must equal d");
  }
}

Dataset Dataset::subset(const std::vector<int>& indices) const {
  std::vector<double> f;
  f.reserve(indices.size() * static_cast<std::size_t>(d_));
  std::vector<double> z;
  z.reserve(indices.size());
  std::vector<long long> g;
  g.reserve(indices.size());
  for (int i : indices) {
    const double* r = row(i);
    f.insert(f.end(), r, r + d_);
    z.push_back(labels_[i]);
    g.push_back(groups_[i]);
  }
  // Subsets keep the parent ids only when every group survives.
  return Dataset(std::move(f), d_, std::move(z), remap_group_codes(g),
                 feature_names_);
}

GroupPartition partition_by_group(const Dataset& data) {
  GroupPartition part;
  for (int i = 0; i < data.n(); ++i) part.per_group[data.group(i)].push_back(i);
  return part;
}

void SplitSpec::validate() const {
  for (double f : {train_frac, val_frac, test_frac}) {
    if (!(f > 0.0 && f < 1.0)) throw DataError("split fractions must lie in (0,1)");
  }
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-12) {
    throw DataError("split fractions must sum to 1");
  }
}

SplitResult split(const Dataset& data, const SplitSpec& spec) {
  spec.validate();
  const int n = data.n();
  if (n < 3) throw DataError("need at least 3 rows to split");

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng64 rng(spec.seed);
  rng.shuffle(idx);

  const int n_train = static_cast<int>(std::floor(spec.train_frac * n));
  const int n_trval = static_cast<int>(std::floor((spec.train_frac + spec.val_frac) * n));

  SplitResult out;
  out.train_idx.assign(idx.begin(), idx.begin() + n_train);
  out.val_idx.assign(idx.begin() + n_train, idx.begin() + n_trval);
  out.test_idx.assign(idx.begin() + n_trval, idx.end());
  std::sort(out.train_idx.begin(), out.train_idx.end());
  std::sort(out.val_idx.begin(), out.val_idx.end());
  std::sort(out.test_idx.begin(), out.test_idx.end());

  auto check_groups = [&](const std::vector<int>& part, const char* name) {
    std::set<int> present;
    for (int i : part) present.insert(data.group(i));
    if (static_cast<int>(present.size()) != data.num_groups()) {
      throw DataError(std::string("split emptied a group in the ") + name +
                      " part; re-seed needed");
    }
  };
  check_groups(out.train_idx, "train");
  check_groups(out.val_idx, "val");
  check_groups(out.test_idx, "test");

  out.train = data.subset(out.train_idx);
  out.val = data.subset(out.val_idx);
  out.test = data.subset(out.test_idx);
  return out;
}

Dataset load_libsvm(const std::string& path, const GroupSource& group_source) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  const int group_col = std::holds_alternative<int>(group_source)
                            ? std::get<int>(group_source)
                            : 0;

  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> labels;
  int max_index = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    labels.push_back(remap_label(parse_double(tok, where), where));
    std::vector<std::pair<int, double>> entries;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) {
        throw DataError("malformed 'index:value' token '" + tok + "' at " + where);
      }
      int index = 0;
      const char* b = tok.data();
      auto [p, ec] = std::from_chars(b, b + colon, index);
      if (ec != std::errc() || p != b + colon || index < 1) {
        throw DataError("bad feature index in '" + tok + "' at " + where);
      }
      const double value = parse_double(tok.substr(colon + 1), where);
      if (!entries.empty() && entries.back().first >= index) {
        throw DataError("feature indices not strictly increasing at " + where);
      }
      entries.push_back({index, value});
      max_index = std::max(max_index, index);
    }
    rows.push_back(std::move(entries));
  }
  if (rows.empty()) throw DataError("no data rows in " + path);

  const int n = static_cast<int>(rows.size());
  std::vector<long long> raw_groups;
  raw_groups.reserve(n);

  if (group_col > 0) {
    if (group_col > max_index) {
      throw DataError("group column " + std::to_string(group_col) +
                      " beyond last feature index " + std::to_string(max_index));
    }
    for (int i = 0; i < n; ++i) {
      bool found = false;
      for (const auto& [idx, val] : rows[i]) {
        if (idx == group_col) {
          const long long code = static_cast<long long>(std::llround(val));
          if (static_cast<double>(code) != val) {
            throw DataError("group column holds non-integer value at row " +
                            std::to_string(i + 1));
          }
          raw_groups.push_back(code);
          found = true;
          break;
        }
      }
      if (!found) {
        throw DataError("group column " + std::to_string(group_col) +
                        " missing on row " + std::to_string(i + 1));
      }
    }
  } else {
    const std::string& side = std::get<std::string>(group_source);
    std::ifstream gs(side);
    if (!gs) throw DataError("cannot open group side file: " + side);
    std::string gline;
    int gline_no = 0;
    while (std::getline(gs, gline)) {
      ++gline_no;
      if (gline.empty()) continue;
      long long code = 0;
      const char* b = gline.data();
      const char* e = b + gline.size();
      while (b < e && (*b == ' ' || *b == '\t')) ++b;
      auto [p, ec] = std::from_chars(b, e, code);
      (void)p;
      if (ec != std::errc()) {
        throw DataError("bad group code at " + side + ":" + std::to_string(gline_no));
      }
      raw_groups.push_back(code);
    }
    if (static_cast<int>(raw_groups.size()) != n) {
      throw DataError("group side file has " + std::to_string(raw_groups.size()) +
                      " entries for " + std::to_string(n) + " data rows");
    }
  }

  std::vector<double> features(static_cast<std::size_t>(n) * max_index, 0.0);
  for (int i = 0; i < n; ++i) {
    double* dst = features.data() + static_cast<std::size_t>(i) * max_index;
    for (const auto& [idx, val] : rows[i]) dst[idx - 1] = val;
  }
  return Dataset(std::move(features), max_index, std::move(labels),
                 remap_group_codes(raw_groups));
}

void save_libsvm(const Dataset& data, const std::string& path,
                 const std::string& group_side_path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  char buf[64];
  for (int i = 0; i < data.n(); ++i) {
    out << (data.label(i) > 0 ? "+1" : "-1");
    const double* r = data.row(i);
    for (int j = 0; j < data.d(); ++j) {
      if (r[j] == 0.0) continue;
      std::snprintf(buf, sizeof(buf), "%.17g", r[j]);
      out << ' ' << (j + 1) << ':' << buf;
    }
    out << '\n';
  }
  std::ofstream gs(group_side_path);
  if (!gs) throw DataError("cannot write file: " + group_side_path);
  for (int i = 0; i < data.n(); ++i) gs << data.group(i) << '\n';
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (quoted) {
      if (c == '"') quoted = false;
      else cur.push_back(c);
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV: " + path);
  const auto header = split_csv_line(line);

  auto find_col = [&](const std::string& name) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == name) return static_cast<int>(j);
    }
    throw DataError("column '" + name + "' not found in " + path);
  };

  const int label_j = find_col(schema.label_col);
  const int group_j = find_col(schema.group_col);
  std::vector<int> feat_js;
  std::vector<std::string> feat_names;
  if (schema.feature_cols.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (static_cast<int>(j) == label_j || static_cast<int>(j) == group_j) continue;
      feat_js.push_back(static_cast<int>(j));
      feat_names.push_back(header[j]);
    }
  } else {
    for (const auto& name : schema.feature_cols) {
      feat_js.push_back(find_col(name));
      feat_names.push_back(name);
    }
  }
  if (feat_js.empty()) throw DataError("no feature columns selected");
  const int d = static_cast<int>(feat_js.size());

  std::vector<double> features;
  std::vector<double> labels;
  std::vector<long long> raw_groups;
  std::map<std::string, long long> group_codes;  // first-appearance order

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("row has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(header.size()) +
                      " at " + where);
    }
    labels.push_back(remap_label(parse_double(cells[label_j], where), where));
    const std::string& gcell = cells[group_j];
    auto it = group_codes.find(gcell);
    if (it == group_codes.end()) {
      it = group_codes.emplace(gcell, static_cast<long long>(group_codes.size()) + 1).first;
    }
    raw_groups.push_back(it->second);
    for (int j : feat_js) features.push_back(parse_double(cells[j], where));
  }
  if (labels.empty()) throw DataError("no data rows in " + path);

  // First-appearance codes are already contiguous 1..G; remap just validates.
  return Dataset(std::move(features), d, std::move(labels),
                 remap_group_codes(raw_groups), std::move(feat_names));
}

}  // namespace dcfair
