#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mad/data.hpp"
#include "mad/synth.hpp"
#include "support.hpp"

using namespace mad;
using mad::test::TempDir;
using mad::test::write_text;

TEST_SUITE("data") {

TEST_CASE("load_csv parses a small table without labels") {
  TempDir dir;
  write_text(dir / "a.csv", "a,b\n1,2\n3,4.5\n-1e-3,7\n");
  const auto t = load_csv(dir / "a.csv");
  CHECK(t.rows() == 3);
  CHECK(t.channels() == 2);
  CHECK_FALSE(t.labels.has_value());
  CHECK(t.channel_names == std::vector<std::string>{"a", "b"});
  CHECK(t.values(1, 1) == 4.5);
  CHECK(t.values(2, 0) == -1e-3);
}

TEST_CASE("load_csv reads 52 value columns and a label column") {
  TempDir dir;
  std::ostringstream s;
  for (int c = 0; c < 52; ++c) s << "xmeas_" << c << ',';
  s << "label\n";
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 52; ++c) s << r * 100 + c << ',';
    s << (r >= 2 ? 1 : 0) << '\n';
  }
  write_text(dir / "tep.csv", s.str());
  const auto t = load_csv(dir / "tep.csv");
  CHECK(t.channels() == 52);
  CHECK(t.rows() == 4);
  REQUIRE(t.labels.has_value());
  CHECK(*t.labels == std::vector<int>{0, 0, 1, 1});
  CHECK(t.values(3, 51) == 351.0);
}

TEST_CASE("load_csv honours ignore_columns and a custom label column") {
  TempDir dir;
  write_text(dir / "c.csv", "time,x,attack\n0,1.5,0\n1,2.5,1\n");
  CsvOptions opt;
  opt.label_column = "attack";
  opt.ignore_columns = {"time"};
  const auto t = load_csv(dir / "c.csv", opt);
  CHECK(t.channels() == 1);
  CHECK(*t.labels == std::vector<int>{0, 1});
  opt.label_column = "missing";
  CHECK(test::error_kind_of([&] { load_csv(dir / "c.csv", opt); }) ==
        ErrorKind::data);
}

TEST_CASE("load_csv rejects NaN cells naming row and column") {
  TempDir dir;
  write_text(dir / "n.csv", "a,b\n1,2\n3,NaN\n");
  const auto msg = test::error_message_of([&] { load_csv(dir / "n.csv"); });
  CHECK(msg.find("row 1") != std::string::npos);
  CHECK(msg.find("'b'") != std::string::npos);
  write_text(dir / "t.csv", "a,b\n1,abc\n");
  CHECK(test::error_kind_of([&] { load_csv(dir / "t.csv"); }) ==
        ErrorKind::data);
}

TEST_CASE("load_csv rejects ragged rows, bad labels and missing files") {
  TempDir dir;
  write_text(dir / "r.csv", "a,b\n1,2\n3\n");
  CHECK(test::error_message_of([&] { load_csv(dir / "r.csv"); })
            .find("ragged") != std::string::npos);
  write_text(dir / "l.csv", "a,label\n1,0\n2,2\n");
  CHECK(test::error_message_of([&] { load_csv(dir / "l.csv"); })
            .find("label") != std::string::npos);
  CHECK(test::error_kind_of([&] { load_csv(dir / "absent.csv"); }) ==
        ErrorKind::data);
}

TEST_CASE("write_csv and load_csv round-trip values and labels") {
  TempDir dir;
  SeriesTable t;
  t.values = Matrix(3, 2);
  t.values(0, 0) = 0.1;
  t.values(1, 1) = 1.0 / 3.0;
  t.values(2, 0) = -2.5e-17;
  t.labels = std::vector<int>{0, 1, 0};
  t.channel_names = {"p", "q"};
  write_csv(t, dir / "rt.csv");
  const auto back = load_csv(dir / "rt.csv");
  CHECK(back.values == t.values);
  CHECK(back.labels == t.labels);
  CHECK(back.channel_names == t.channel_names);
}

TEST_CASE("normalizer maps the training range onto [0,1]") {
  SeriesTable train;
  train.values = Matrix(2, 2);
  train.values(0, 0) = 2;
  train.values(1, 0) = 4;
  train.values(0, 1) = 5;
  train.values(1, 1) = 5;
  const auto norm = Normalizer::fit(train);

  SeriesTable probe;
  probe.values = Matrix(4, 2, 5.0);
  probe.values(0, 0) = 2;
  probe.values(1, 0) = 4;
  probe.values(2, 0) = 3;
  probe.values(3, 0) = 6;
  const auto out = norm.apply(probe);
  CHECK(out.values(0, 0) == 0.0);
  CHECK(out.values(1, 0) == 1.0);
  CHECK(out.values(2, 0) == 0.5);
  CHECK(out.values(3, 0) == 2.0);
  for (std::size_t r = 0; r < 4; ++r) CHECK(out.values(r, 1) == 0.0);
}

TEST_CASE("normalizer apply then inverse recovers raw values") {
  Rng rng(7);
  SeriesTable train;
  train.values = test::random_matrix(50, 4, rng, -300.0, 1200.0);
  const auto norm = Normalizer::fit(train);
  const auto scaled = norm.apply(train);
  for (double v : scaled.values.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  const auto back = norm.inverse(scaled);
  for (std::size_t i = 0; i < train.values.size(); ++i) {
    const double raw = train.values.values()[i];
    CHECK(std::abs(back.values.values()[i] - raw) <= 1e-9 * std::abs(raw));
  }
}

TEST_CASE("normalizer text form round-trips exactly") {
  Rng rng(3);
  SeriesTable train;
  train.values = test::random_matrix(10, 3, rng, -1.0, 1.0);
  const auto norm = Normalizer::fit(train);
  const auto back = Normalizer::from_csv(norm.to_csv());
  CHECK(back.min() == norm.min());
  CHECK(back.max() == norm.max());
}

TEST_CASE("normalizer needs two training rows and matching arity") {
  SeriesTable one;
  one.values = Matrix(1, 2);
  CHECK(test::error_kind_of([&] { Normalizer::fit(one); }) == ErrorKind::data);
  SeriesTable two;
  two.values = Matrix(2, 2);
  const auto norm = Normalizer::fit(two);
  SeriesTable three;
  three.values = Matrix(2, 3);
  CHECK(test::error_kind_of([&] { norm.apply(three); }) == ErrorKind::data);
}

TEST_CASE("make_windows: count and starts") {
  SeriesTable t;
  t.values = Matrix(500, 2);
  for (std::size_t r = 0; r < 500; ++r) t.values(r, 0) = static_cast<double>(r);
  const auto ws = make_windows(t, 21, 1);
  CHECK(ws.size() == 480);
  CHECK(ws.front().x(0, 0) == 0.0);
  CHECK(ws.back().origin.start == 479);
  CHECK(ws.back().x(20, 0) == 499.0);
  const auto strided = make_windows(t, 21, 7, 4);
  CHECK(strided.size() == (500 - 21) / 7 + 1);
  CHECK(strided[3].origin == WindowOrigin{4, 21});
}

TEST_CASE("window count formula holds over a sweep") {
  for (std::size_t rows = 2; rows <= 40; ++rows) {
    for (std::size_t len = 2; len <= rows; ++len) {
      for (std::size_t stride = 1; stride <= 6; ++stride) {
        SeriesTable t;
        t.values = Matrix(rows, 1);
        const auto ws = make_windows(t, len, stride);
        std::size_t expected = 0;
        for (std::size_t s = 0; s + len <= rows; s += stride) ++expected;
        REQUIRE(ws.size() == expected);
        REQUIRE(window_count(rows, len, stride) == expected);
      }
    }
  }
}

TEST_CASE("a single anomalous row labels exactly the covering windows") {
  SeriesTable t;
  t.values = Matrix(500, 1);
  t.labels = std::vector<int>(500, 0);
  (*t.labels)[30] = 1;
  const auto ws = make_windows(t, 21, 1);
  std::size_t positives = 0;
  for (const auto& w : ws) {
    const bool covers = w.origin.start <= 30 && 30 < w.origin.start + 21;
    CHECK(w.label == static_cast<int>(covers));
    positives += static_cast<std::size_t>(w.label);
  }
  CHECK(positives == 21);
}

TEST_CASE("window labels match exhaustive containment on random tables") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 3 + uniform_index(rng, 30);
    SeriesTable t;
    t.values = Matrix(rows, 1);
    t.labels = std::vector<int>(rows);
    for (auto& l : *t.labels) l = uniform01(rng) < 0.1 ? 1 : 0;
    const std::size_t len = 2 + uniform_index(rng, rows - 1);
    const std::size_t stride = 1 + uniform_index(rng, 3);
    for (const auto& w : make_windows(t, len, stride)) {
      int any = 0;
      for (std::size_t r = w.origin.start; r < w.origin.start + len; ++r) {
        any |= (*t.labels)[r];
      }
      REQUIRE(w.label == any);
    }
  }
}

TEST_CASE("TEP-shaped test series: NOC windows lie inside rows 0..159") {
  SeriesTable t;
  t.values = Matrix(960, 52);
  t.labels = std::vector<int>(960, 0);
  for (std::size_t r = 160; r < 960; ++r) (*t.labels)[r] = 1;
  const auto ws = make_windows(t, 21, 1);
  std::size_t normal = 0;
  for (const auto& w : ws) {
    if (w.label == 0) {
      ++normal;
      CHECK(w.origin.start + 20 <= 159);
    }
  }
  CHECK(normal == 140);
  CHECK(ws.size() - normal == 800);
}

TEST_CASE("make_windows rejects windows longer than the series") {
  SeriesTable t;
  t.values = Matrix(10, 1);
  CHECK(test::error_kind_of([&] { make_windows(t, 11, 1); }) ==
        ErrorKind::data);
  CHECK(test::error_kind_of([&] { make_windows(t, 5, 0); }) ==
        ErrorKind::usage);
}

TEST_CASE("split_train_val sizes, determinism and disjointness") {
  const auto ws = test::random_windows(100, 3, 1, 5);
  const auto [tr, va] = split_train_val(ws, 0.8, 42);
  CHECK(tr.size() == 80);
  CHECK(va.size() == 20);
  const auto [tr2, va2] = split_train_val(ws, 0.8, 42);
  std::set<std::uint64_t> seen;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(tr[i].origin == tr2[i].origin);
    seen.insert(tr[i].origin.start);
  }
  for (std::size_t i = 0; i < va.size(); ++i) {
    CHECK(va[i].origin == va2[i].origin);
    seen.insert(va[i].origin.start);
  }
  CHECK(seen.size() == 100);

  const auto [a, b] = split_train_val(test::random_windows(5, 3, 1, 1), 0.8, 1);
  CHECK(a.size() == 4);
  CHECK(b.size() == 1);
}

TEST_CASE("split_train_val rejects empty input and bad fractions") {
  CHECK(test::error_kind_of([] { split_train_val({}, 0.8, 1); }) ==
        ErrorKind::data);
  const auto ws = test::random_windows(4, 3, 1, 1);
  CHECK(test::error_kind_of([&] { split_train_val(ws, 1.0, 1); }) ==
        ErrorKind::usage);
  CHECK(test::error_kind_of([&] { split_train_val(ws, 0.0, 1); }) ==
        ErrorKind::usage);
}

TEST_CASE("synth_generate is deterministic") {
  SynthConfig cfg;
  cfg.seed = 9;
  const auto a = synth_generate(cfg);
  const auto b = synth_generate(cfg);
  CHECK(a.train.values == b.train.values);
  CHECK(a.test.values == b.test.values);
  CHECK(a.test.labels == b.test.labels);
  REQUIRE(a.train.labels.has_value());
  CHECK(std::count(a.train.labels->begin(), a.train.labels->end(), 1) == 0);
  CHECK(a.train.channels() == 6);
  CHECK(a.train.rows() == 4000);
  cfg.seed = 10;
  CHECK_FALSE(synth_generate(cfg).test.values == a.test.values);
}

TEST_CASE("synth with zero segments has all-normal labels") {
  SynthConfig cfg;
  cfg.segment_count = 0;
  const auto d = synth_generate(cfg);
  REQUIRE(d.test.labels.has_value());
  CHECK(std::count(d.test.labels->begin(), d.test.labels->end(), 1) == 0);
}

TEST_CASE("five drift segments of length 40 label exactly 200 rows") {
  SynthConfig cfg;
  cfg.kinds = {AnomalyKind::drift};
  cfg.segment_count = 5;
  cfg.segment_min_len = 40;
  cfg.segment_max_len = 40;
  const auto d = synth_generate(cfg);
  CHECK(std::count(d.test.labels->begin(), d.test.labels->end(), 1) == 200);
  CHECK(d.segments.size() == 5);
  for (const auto& s : d.segments) CHECK(s.kind == AnomalyKind::drift);
}

TEST_CASE("labels mark exactly the overwritten rows") {
  SynthConfig cfg;
  cfg.seed = 4;
  const auto d = synth_generate(cfg);
  const SyntheticProcess proc(cfg);
  const auto clean = proc.sample(cfg.test_rows, cfg.train_rows, 1);
  for (std::size_t r = 0; r < cfg.test_rows; ++r) {
    bool changed = false;
    for (std::size_t c = 0; c < cfg.channels; ++c) {
      changed |= clean.values(r, c) != d.test.values(r, c);
    }
    REQUIRE(static_cast<int>(changed) == (*d.test.labels)[r]);
  }
}

TEST_CASE("synth rejects segments that cannot fit") {
  SynthConfig cfg;
  cfg.test_rows = 100;
  cfg.segment_count = 5;
  cfg.segment_min_len = 30;
  cfg.segment_max_len = 30;
  CHECK(test::error_kind_of([&] { synth_generate(cfg); }) == ErrorKind::data);
  cfg.kinds.clear();
  CHECK(test::error_kind_of([&] { cfg.validate(); }) == ErrorKind::usage);
}

}
