#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "dcfair/dataset.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace dcfair;
namespace fs = std::filesystem;

namespace {

fs::path tmpdir() {
  const auto dir = fs::temp_directory_path() / "dcfair_test_data";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("libsvm: hand-parsed toy file") {
  const auto f = tmpdir() / "toy.libsvm";
  const auto g = tmpdir() / "toy.groups";
  write_file(f, "+1 1:0.5 3:-2\n0 2:1.25\n-1 1:1 2:2 3:3\n");
  write_file(g, "7\n3\n7\n");
  const Dataset d = load_libsvm(f.string(), GroupSource(g.string()));
  CHECK(d.n() == 3);
  CHECK(d.d() == 3);
  // hand parse: row 0 = (0.5, 0, -2), row 1 = (0, 1.25, 0), row 2 = (1,2,3)
  CHECK(d.row(0)[0] == 0.5);
  CHECK(d.row(0)[1] == 0.0);
  CHECK(d.row(0)[2] == -2.0);
  CHECK(d.row(1)[1] == 1.25);
  CHECK(d.row(2)[2] == 3.0);
  // labels {0,1} remap to -1/+1
  CHECK(d.label(0) == 1.0);
  CHECK(d.label(1) == -1.0);
  CHECK(d.label(2) == -1.0);
  // raw codes {3,7} remap to {1,2} preserving sorted order
  CHECK(d.group(0) == 2);
  CHECK(d.group(1) == 1);
  CHECK(d.group(2) == 2);
}

TEST_CASE("libsvm: single row with one group fails") {
  const auto f = tmpdir() / "one.libsvm";
  const auto g = tmpdir() / "one.groups";
  write_file(f, "+1 1:0.5\n");
  write_file(g, "1\n");
  CHECK_THROWS_WITH_AS(load_libsvm(f.string(), GroupSource(g.string())),
                       doctest::Contains("fewer than 2 groups"), DataError);
}

TEST_CASE("libsvm: malformed line reports the line number") {
  const auto f = tmpdir() / "bad.libsvm";
  write_file(f, "+1 1:0.5\n-1 oops\n");
  const auto g = tmpdir() / "bad.groups";
  write_file(g, "1\n2\n");
  CHECK_THROWS_WITH_AS(load_libsvm(f.string(), GroupSource(g.string())),
                       doctest::Contains(":2"), DataError);
}

TEST_CASE("libsvm: group column present and missing") {
  const auto f = tmpdir() / "col.libsvm";
  write_file(f, "+1 1:0.5 2:1\n-1 1:0.25 2:2\n");
  const Dataset d = load_libsvm(f.string(), GroupSource(2));
  CHECK(d.num_groups() == 2);
  CHECK(d.group(0) == 1);
  CHECK(d.group(1) == 2);
  // the group column stays part of the features
  CHECK(d.d() == 2);

  const auto f2 = tmpdir() / "col_missing.libsvm";
  write_file(f2, "+1 1:0.5 2:1\n-1 1:0.25\n");
  CHECK_THROWS_WITH_AS(load_libsvm(f2.string(), GroupSource(2)),
                       doctest::Contains("missing on row 2"), DataError);
}

TEST_CASE("csv: groups by first appearance, hand check") {
  const auto f = tmpdir() / "toy.csv";
  write_file(f,
             "id,score,race,y\n"
             "1,0.5,W,1\n"
             "2,0.25,NW,0\n"
             "3,-1,W,1\n"
             "4,2,NW,0\n"
             "5,3,W,1\n");
  const Dataset d = load_csv(f.string(), CsvSchema{"y", "race", {"score"}});
  CHECK(d.n() == 5);
  CHECK(d.d() == 1);
  CHECK(d.group(0) == 1);  // W first
  CHECK(d.group(1) == 2);  // NW second
  CHECK(d.group(2) == 1);
  CHECK(d.row(3)[0] == 2.0);
  CHECK(d.label(1) == -1.0);

  // feature_cols empty -> all other columns
  const Dataset d2 = load_csv(f.string(), CsvSchema{"y", "race", {}});
  CHECK(d2.d() == 2);  // id and score
  CHECK(d2.feature_names()[0] == "id");
}

TEST_CASE("csv: errors") {
  const auto f = tmpdir() / "bad.csv";
  write_file(f, "a,b,y\n1,x,1\n2,0.5,0\n");
  CHECK_THROWS_AS(load_csv(f.string(), CsvSchema{"y", "a", {"b"}}), DataError);
  CHECK_THROWS_WITH_AS(load_csv(f.string(), CsvSchema{"label", "a", {"b"}}),
                       doctest::Contains("'label' not found"), DataError);

  const auto one = tmpdir() / "one.csv";
  write_file(one, "x,g,y\n1,A,1\n");
  CHECK_THROWS_WITH_AS(load_csv(one.string(), CsvSchema{"y", "g", {"x"}}),
                       doctest::Contains("fewer than 2 groups"), DataError);
}

TEST_CASE("split: sizes, determinism, partition property") {
  std::vector<double> feats;
  for (int i = 0; i < 20; ++i) feats.push_back(i * 0.5);
  const Dataset d(std::move(feats), 2, {1, -1, 1, -1, 1, -1, 1, -1, 1, -1},
                  {1, 2, 1, 1, 2, 1, 2, 2, 1, 1});
  const SplitSpec spec{0.6, 0.2, 0.2, 7};
  const SplitResult r1 = split(d, spec);
  CHECK(r1.train.n() == 6);
  CHECK(r1.val.n() == 2);
  CHECK(r1.test.n() == 2);

  const SplitResult r2 = split(d, spec);
  CHECK(r1.train_idx == r2.train_idx);
  CHECK(r1.val_idx == r2.val_idx);
  CHECK(r1.test_idx == r2.test_idx);

  std::set<int> all;
  for (const auto* part : {&r1.train_idx, &r1.val_idx, &r1.test_idx}) {
    for (int i : *part) {
      CHECK(all.insert(i).second);  // disjoint
    }
  }
  CHECK(all.size() == 10);  // covers 0..9
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 9);
}

TEST_CASE("split: floor arithmetic at the bank dataset size") {
  const int n = 41188;
  std::vector<double> feats(n, 0.0);
  std::vector<double> labels(n);
  std::vector<int> groups(n);
  for (int i = 0; i < n; ++i) {
    feats[i] = i;
    labels[i] = (i % 2) ? 1.0 : -1.0;
    groups[i] = 1 + (i % 2);
  }
  const Dataset d(std::move(feats), 1, std::move(labels), std::move(groups));
  const SplitResult r = split(d, SplitSpec{0.6, 0.2, 0.2, 1});
  const int n_train = static_cast<int>(std::floor(0.6 * n));
  const int n_val = static_cast<int>(std::floor(0.8 * n)) - n_train;
  CHECK(r.train.n() == n_train);  // 24712
  CHECK(r.val.n() == n_val);      // 8238
  CHECK(r.test.n() == n - n_train - n_val);
  CHECK(r.train.n() == 24712);
  CHECK(r.val.n() == 8238);
  CHECK(r.test.n() == 8238);
}

TEST_CASE("split: a split that empties a group raises") {
  // 4 rows of group 1, a single row of group 2: two of the three parts
  // cannot contain the group-2 row, whatever the seed
  std::vector<double> feats = {0, 1, 2, 3, 4};
  const Dataset d(std::move(feats), 1, {1, -1, 1, -1, 1}, {1, 1, 1, 1, 2});
  CHECK_THROWS_WITH_AS(split(d, SplitSpec{0.6, 0.2, 0.2, 3}),
                       doctest::Contains("re-seed"), DataError);
}

TEST_CASE("partition_by_group") {
  std::vector<double> feats = {0, 1, 2};
  const Dataset d(std::move(feats), 1, {1, -1, 1}, {1, 2, 1});
  const GroupPartition p = partition_by_group(d);
  CHECK(p.per_group.at(1) == std::vector<int>{0, 2});
  CHECK(p.per_group.at(2) == std::vector<int>{1});

  const Dataset big = testutil::random_dataset(100, 3, 4, 9);
  const GroupPartition pb = partition_by_group(big);
  std::set<int> seen;
  std::size_t total = 0;
  for (const auto& [g, idx] : pb.per_group) {
    total += idx.size();
    for (int i : idx) CHECK(seen.insert(i).second);
  }
  CHECK(total == 100);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 99);
}

TEST_CASE("libsvm round-trip is bit-exact") {
  const Dataset d = testutil::random_dataset(60, 4, 3, 123);
  const auto f = tmpdir() / "rt.libsvm";
  const auto g = tmpdir() / "rt.groups";
  save_libsvm(d, f.string(), g.string());
  const Dataset r = load_libsvm(f.string(), GroupSource(g.string()));
  REQUIRE(r.n() == d.n());
  REQUIRE(r.d() == d.d());
  CHECK(r.features() == d.features());
  CHECK(r.labels() == d.labels());
  CHECK(r.groups() == d.groups());
}

TEST_CASE("dataset invariants") {
  CHECK_THROWS_AS(Dataset({1.0}, 1, {2.0}, {1, 2}), DataError);  // bad label
  CHECK_THROWS_AS(Dataset({1.0, 2.0}, 1, {1.0, -1.0}, {1, 3}), DataError);  // gap
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Dataset({inf, 1.0}, 1, {1.0, -1.0}, {1, 2}), DataError);
}
