#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "taskmerge/errors.hpp"
#include "taskmerge/features.hpp"
#include "taskmerge/rng.hpp"

using namespace taskmerge;

namespace {

Dataset random_dataset(std::uint64_t seed, std::size_t n) {
  rng::SplitMix64 gen(seed);
  Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.features.duration_s = 0.1 + 1.9 * gen.next_unit();
    s.features.size_kb = 50.0 + 1500.0 * gen.next_unit();
    s.features.framerate = 10.0 + 50.0 * gen.next_unit();
    s.features.width = 100 + static_cast<int>(gen.next_below(2000));
    s.features.height = 100 + static_cast<int>(gen.next_below(1200));
    // a random composition of degree 1..5
    const int degree = 1 + static_cast<int>(gen.next_below(5));
    for (int k = 0; k < degree; ++k) {
      switch (gen.next_below(4)) {
        case 0: ++s.features.b_count; break;
        case 1: ++s.features.s_count; break;
        case 2: ++s.features.r_count; break;
        default:
          if (s.features.mpeg4 + s.features.vp9 + s.features.hevc == 0)
            s.features.mpeg4 = 1;
          else
            ++s.features.b_count;
      }
    }
    s.saving = gen.next_unit() * 0.999;
    data.samples.push_back(s);
  }
  return data;
}

}  // namespace

TEST_CASE("encode counts VIC kinds and one-hots codec parameters") {
  const VideoMeta video{"seg", 2.0, 876.0, 30.0, 1280, 720};
  const std::vector<Operation> ops = {Operation::bitrate(512),
                                      Operation::codec(CodecName::Mpeg4)};
  const FeatureVector f = encode(video, ops);
  CHECK(f.duration_s == 2.0);
  CHECK(f.size_kb == 876.0);
  CHECK(f.framerate == 30.0);
  CHECK(f.width == 1280);
  CHECK(f.height == 720);
  CHECK(f.b_count == 1);
  CHECK(f.s_count == 0);
  CHECK(f.r_count == 0);
  CHECK(f.mpeg4 == 1);
  CHECK(f.vp9 == 0);
  CHECK(f.hevc == 0);
  CHECK(f.degree() == 2);
}

TEST_CASE("encode discards VIC parameter values, keeping only counts") {
  const VideoMeta video{"seg", 1.0, 500.0, 24.0, 854, 480};
  const std::vector<Operation> ops = {Operation::bitrate(384),
                                      Operation::bitrate(1536),
                                      Operation::framerate(20)};
  const FeatureVector f = encode(video, ops);
  CHECK(f.b_count == 2);
  CHECK(f.s_count == 1);
  CHECK(f.r_count == 0);
  CHECK(f.mpeg4 + f.vp9 + f.hevc == 0);
}

TEST_CASE("encode is permutation-invariant (property)") {
  rng::SplitMix64 gen(11);
  const auto catalog = Operation::all();
  const VideoMeta video{"seg", 2.0, 700.0, 30.0, 1280, 720};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Operation> ops;
    const int k = 1 + static_cast<int>(gen.next_below(5));
    for (int i = 0; i < k; ++i) ops.push_back(catalog[gen.next_below(catalog.size())]);
    const FeatureVector before = encode(video, ops);
    for (std::size_t i = ops.size(); i > 1; --i)
      std::swap(ops[i - 1], ops[gen.next_below(i)]);
    CHECK(encode(video, ops) == before);
  }
}

TEST_CASE("encode rejects empty and oversized groups") {
  const VideoMeta video{"seg", 2.0, 700.0, 30.0, 1280, 720};
  CHECK_THROWS_AS(encode(video, std::vector<Operation>{}), std::invalid_argument);
  CHECK_THROWS_AS(encode(video, std::vector<Operation>(6, Operation::bitrate(512))),
                  std::invalid_argument);
}

TEST_CASE("feature vector validation") {
  FeatureVector f{2.0, 876.0, 30.0, 1280, 720, 1, 0, 0, 1, 0, 0};
  CHECK_NOTHROW(f.validate());
  FeatureVector negative = f;
  negative.b_count = -1;
  CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
  FeatureVector overfull = f;
  overfull.b_count = 5;
  overfull.s_count = 1;
  CHECK_THROWS_AS(overfull.validate(), std::invalid_argument);
  FeatureVector empty = f;
  empty.b_count = empty.mpeg4 = 0;
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
  FeatureVector flag = f;
  flag.vp9 = 2;
  CHECK_THROWS_AS(flag.validate(), std::invalid_argument);
}

TEST_CASE("csv round trip is lossless (property)") {
  for (std::uint64_t seed : {3ULL, 4ULL, 5ULL}) {
    const Dataset data = random_dataset(seed, 200);
    std::stringstream io;
    write_csv(data, io);
    CHECK(read_csv(io) == data);
  }
}

TEST_CASE("csv: documented sample row parses to a 33.60% saving") {
  std::stringstream in(std::string(kDatasetCsvHeader) +
                       "\n2.0,876,30,1280,720,1,0,0,1,0,0,0.3360\n");
  const Dataset data = read_csv(in);
  REQUIRE(data.size() == 1);
  CHECK(data.samples[0].saving == 0.3360);
  CHECK(data.samples[0].features.b_count == 1);
  CHECK(data.samples[0].features.mpeg4 == 1);
}

TEST_CASE("csv rejects schema drift and bad rows") {
  // unknown extra column
  std::stringstream extra(std::string(kDatasetCsvHeader) + ",bonus\n");
  CHECK_THROWS_AS(read_csv(extra), ParseError);

  // reordered header
  std::stringstream reordered(
      "size_kb,duration_s,framerate,width,height,b_count,s_count,r_count,"
      "mpeg4,vp9,hevc,saving\n");
  CHECK_THROWS_AS(read_csv(reordered), ParseError);

  // negative count
  std::stringstream negative(std::string(kDatasetCsvHeader) +
                             "\n2.0,876,30,1280,720,-1,0,0,1,0,0,0.3\n");
  CHECK_THROWS_AS(read_csv(negative), ParseError);

  // saving out of range
  std::stringstream range(std::string(kDatasetCsvHeader) +
                          "\n2.0,876,30,1280,720,1,0,0,1,0,0,1.5\n");
  CHECK_THROWS_AS(read_csv(range), ParseError);

  // line numbers point at the offending row
  std::stringstream bad_row(std::string(kDatasetCsvHeader) +
                            "\n2.0,876,30,1280,720,1,0,0,0,0,0,0.3\nnot,a,row\n");
  try {
    read_csv(bad_row);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("split: sizes, disjointness, and reproducibility") {
  const Dataset data = random_dataset(21, 10);
  auto [train, test] = split(data, 0.8, 99);
  CHECK(train.size() == 8);
  CHECK(test.size() == 2);

  auto [train2, test2] = split(data, 0.8, 99);
  CHECK(train == train2);
  CHECK(test == test2);

  // union restores the original multiset; both parts keep input order, so
  // a merge by identity works
  std::size_t ti = 0, si = 0;
  for (const Sample& s : data.samples) {
    if (ti < train.size() && train.samples[ti] == s)
      ++ti;
    else if (si < test.size() && test.samples[si] == s)
      ++si;
  }
  CHECK(ti == train.size());
  CHECK(si == test.size());
}

TEST_CASE("split size follows round(fraction * N)") {
  // the documented 80% of 81,327 -> 65,062
  Dataset data;
  data.samples.resize(81327);
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    data.samples[i].features =
        FeatureVector{1.0, 100.0, 30.0, 1280, 720, 1, 0, 0, 0, 0, 0};
    data.samples[i].saving = 0.1;
  }
  auto [train, test] = split(data, 0.8, 1);
  CHECK(train.size() == 65062);
  CHECK(test.size() == 81327 - 65062);
}

TEST_CASE("split argument validation") {
  const Dataset data = random_dataset(31, 10);
  CHECK_THROWS_AS(split(data, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split(data, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split(random_dataset(31, 1), 0.5, 1), std::invalid_argument);
}
