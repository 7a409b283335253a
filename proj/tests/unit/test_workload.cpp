#include <bit>
#include <sstream>

#include "doctest.h"
#include "taskmerge/errors.hpp"
#include "taskmerge/rng.hpp"
#include "taskmerge/workload.hpp"

using namespace taskmerge;

namespace {

VideoMeta video(const std::string& segment) {
  return VideoMeta{segment, 2.0, 1000.0, 30.0, 1280, 720};
}

TranscodeTask task(const std::string& id, const std::string& segment,
                   Operation op) {
  return TranscodeTask{id, video(segment), op};
}

}  // namespace

TEST_CASE("operation catalog has the 18 documented operations") {
  CHECK(Operation::all().size() == 18);
  CHECK(Operation::bitrate(512).parameter_string() == "512K");
  CHECK(Operation::framerate(30).parameter_string() == "30");
  CHECK(Operation::resolution(1280, 800).parameter_string() == "1280x800");
  CHECK(Operation::codec(CodecName::Hevc).parameter_string() == "hevc");

  CHECK_THROWS_AS(Operation::bitrate(400), std::invalid_argument);
  CHECK_THROWS_AS(Operation::framerate(29), std::invalid_argument);
  CHECK_THROWS_AS(Operation::resolution(1280, 720), std::invalid_argument);

  // Workload-file literals parse back to the same operation.
  for (const Operation& op : Operation::all())
    CHECK(Operation::parse(op.kind_string(), op.parameter_string()) == op);
}

TEST_CASE("video metadata validation") {
  CHECK_NOTHROW(video("s").validate());
  VideoMeta long_segment = video("s");
  long_segment.duration_s = 2.5;
  CHECK_THROWS_AS(long_segment.validate(), std::invalid_argument);
  VideoMeta empty_size = video("s");
  empty_size.size_kb = 0.0;
  CHECK_THROWS_AS(empty_size.validate(), std::invalid_argument);
}

TEST_CASE("canonical signatures: key agreement per similarity level") {
  const auto a = task("a", "seg1", Operation::bitrate(512));
  const auto b = task("b", "seg1", Operation::bitrate(512));
  const auto c = task("c", "seg1", Operation::bitrate(768));
  const auto d = task("d", "seg1", Operation::codec(CodecName::Hevc));

  const TaskSignatures sa = canonical_signatures(a);
  const TaskSignatures sb = canonical_signatures(b);
  const TaskSignatures sc = canonical_signatures(c);
  const TaskSignatures sd = canonical_signatures(d);

  // identical (segment, kind, parameter) triples
  CHECK(sa.task_key == sb.task_key);
  CHECK(sa.dataop_key == sb.dataop_key);
  CHECK(sa.dataonly_key == sb.dataonly_key);

  // same segment and kind, different parameter
  CHECK_FALSE(sa.task_key == sc.task_key);
  CHECK(sa.dataop_key == sc.dataop_key);
  CHECK(sa.dataonly_key == sc.dataonly_key);

  // same segment, different kind
  CHECK_FALSE(sa.task_key == sd.task_key);
  CHECK_FALSE(sa.dataop_key == sd.dataop_key);
  CHECK(sa.dataonly_key == sd.dataonly_key);
}

TEST_CASE("classify_pair matches the three similarity levels") {
  const auto a = task("a", "seg1", Operation::framerate(10));
  CHECK(classify_pair(a, task("b", "seg1", Operation::framerate(10))) ==
        SimilarityLevel::TaskLevel);
  CHECK(classify_pair(a, task("b", "seg1", Operation::framerate(40))) ==
        SimilarityLevel::DataOperation);
  CHECK(classify_pair(a, task("b", "seg1", Operation::bitrate(384))) ==
        SimilarityLevel::DataOnly);
  CHECK(classify_pair(a, task("b", "seg2", Operation::framerate(10))) ==
        SimilarityLevel::None);
}

TEST_CASE("classify_pair is symmetric and nests (property)") {
  rng::SplitMix64 gen(101);
  const auto ops = Operation::all();
  for (int trial = 0; trial < 300; ++trial) {
    const std::string seg_a = gen.next_below(2) ? "segA" : "segB";
    const std::string seg_b = gen.next_below(2) ? "segA" : "segB";
    const auto a = task("a", seg_a, ops[gen.next_below(ops.size())]);
    const auto b = task("b", seg_b, ops[gen.next_below(ops.size())]);
    const SimilarityLevel level = classify_pair(a, b);
    CHECK(level == classify_pair(b, a));

    const TaskSignatures sa = canonical_signatures(a);
    const TaskSignatures sb = canonical_signatures(b);
    if (level == SimilarityLevel::TaskLevel) {
      CHECK(sa.dataop_key == sb.dataop_key);
      CHECK(sa.dataonly_key == sb.dataonly_key);
    }
    if (level >= SimilarityLevel::DataOperation)
      CHECK(sa.dataonly_key == sb.dataonly_key);
  }
}

TEST_CASE("admit: singleton group for an unseen task") {
  SignatureTables tables;
  const auto adm = tables.admit(task("t1", "seg1", Operation::bitrate(512)));
  CHECK(adm.matched_level == SimilarityLevel::None);
  CHECK(tables.group_count() == 1);
  CHECK(tables.group(adm.group_index).degree() == 1);
  CHECK(tables.group(adm.group_index).level() == SimilarityLevel::None);
}

TEST_CASE("admit: same segment and kind joins at data-operation level") {
  SignatureTables tables;
  tables.admit(task("t1", "seg1", Operation::bitrate(512)));
  const auto adm = tables.admit(task("t2", "seg1", Operation::bitrate(768)));
  CHECK(adm.matched_level == SimilarityLevel::DataOperation);
  CHECK(tables.group_count() == 1);
  CHECK(tables.group(adm.group_index).degree() == 2);
  CHECK(tables.group(adm.group_index).level() == SimilarityLevel::DataOperation);
}

TEST_CASE("admit: degree cap forces a new group on the sixth duplicate") {
  SignatureTables tables;
  for (int i = 0; i < 6; ++i) {
    const auto adm =
        tables.admit(task("t" + std::to_string(i), "seg1", Operation::bitrate(512)));
    if (i == 0 || i == 5)
      CHECK(adm.matched_level == SimilarityLevel::None);
    else
      CHECK(adm.matched_level == SimilarityLevel::TaskLevel);
  }
  REQUIRE(tables.group_count() == 2);
  CHECK(tables.group(0).degree() == 5);
  CHECK(tables.group(1).degree() == 1);

  // The overflow group is reachable through its weaker keys too: a new
  // same-kind arrival joins it rather than opening a third group.
  const auto adm = tables.admit(task("t6", "seg1", Operation::bitrate(1024)));
  CHECK(adm.matched_level == SimilarityLevel::DataOperation);
  CHECK(adm.group_index == 1);
  CHECK(tables.group_count() == 2);
}

TEST_CASE("admit: probe order prefers the strongest similarity") {
  SignatureTables tables;
  tables.admit(task("t1", "seg1", Operation::bitrate(512)));
  tables.admit(task("t2", "seg1", Operation::codec(CodecName::Vp9)));
  // Both existing tasks sit in one data-only group; an exact duplicate of
  // t1 must match at task level, not merely data-only.
  const auto adm = tables.admit(task("t3", "seg1", Operation::bitrate(512)));
  CHECK(adm.matched_level == SimilarityLevel::TaskLevel);
  CHECK(tables.group(adm.group_index).degree() == 3);
}

TEST_CASE("admit: duplicate task id is rejected") {
  SignatureTables tables;
  tables.admit(task("t1", "seg1", Operation::bitrate(512)));
  CHECK_THROWS_AS(tables.admit(task("t1", "seg2", Operation::framerate(10))),
                  std::invalid_argument);
}

TEST_CASE("admission sequences keep groups capped and segment-pure (property)") {
  rng::SplitMix64 gen(202);
  const auto ops = Operation::all();
  for (int trial = 0; trial < 30; ++trial) {
    SignatureTables tables;
    const int n = 20 + static_cast<int>(gen.next_below(60));
    for (int i = 0; i < n; ++i) {
      const std::string seg = "seg" + std::to_string(gen.next_below(4));
      tables.admit(task("t" + std::to_string(i), seg, ops[gen.next_below(ops.size())]));
    }
    std::size_t total_tasks = 0;
    for (const MergeGroup& group : tables.groups()) {
      CHECK(group.degree() >= 1);
      CHECK(group.degree() <= SignatureTables::kMaxDegree);
      for (const TranscodeTask& t : group.tasks)
        CHECK(t.video.segment_id == group.video().segment_id);
      if (group.level() == SimilarityLevel::DataOperation)
        for (const TranscodeTask& t : group.tasks)
          CHECK(t.operation.kind() == group.tasks.front().operation.kind());
      total_tasks += static_cast<std::size_t>(group.degree());
    }
    CHECK(total_tasks == static_cast<std::size_t>(n));
  }
}

TEST_CASE("count_merge_cases: known values") {
  CHECK(count_merge_cases(18, 5) == 12597);
  CHECK(count_merge_cases(2, 2) == 1);
  CHECK(count_merge_cases(18, 3) == 969);
}

TEST_CASE("count_merge_cases equals brute-force subset enumeration (property)") {
  // Enumerate all subsets of n <= 12 elements and count by size.
  for (int n = 2; n <= 12; ++n) {
    std::vector<std::uint64_t> by_size(static_cast<std::size_t>(n) + 1, 0);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask)
      ++by_size[static_cast<std::size_t>(std::popcount(mask))];
    for (int k = 2; k <= n; ++k) {
      std::uint64_t expected = 0;
      for (int j = 2; j <= k; ++j) expected += by_size[static_cast<std::size_t>(j)];
      CHECK(count_merge_cases(n, k) == expected);
    }
  }
}

TEST_CASE("count_merge_cases: bad ranges and overflow") {
  CHECK_THROWS_AS(count_merge_cases(18, 1), std::invalid_argument);
  CHECK_THROWS_AS(count_merge_cases(4, 5), std::invalid_argument);
  CHECK_THROWS_AS(count_merge_cases(256, 128), std::overflow_error);
}

TEST_CASE("workload file round trip") {
  std::vector<TranscodeTask> tasks = {
      task("t1", "seg1", Operation::bitrate(384)),
      task("t2", "seg1", Operation::codec(CodecName::Vp9)),
      task("t3", "seg2", Operation::resolution(1920, 1080)),
  };
  tasks[2].video.duration_s = 0.75;
  tasks[2].video.size_kb = 433.25;

  std::stringstream io;
  write_workload(tasks, io);
  const std::vector<TranscodeTask> back = read_workload(io);
  REQUIRE(back.size() == tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    CHECK(back[i].task_id == tasks[i].task_id);
    CHECK(back[i].video.segment_id == tasks[i].video.segment_id);
    CHECK(back[i].video.duration_s == tasks[i].video.duration_s);
    CHECK(back[i].video.size_kb == tasks[i].video.size_kb);
    CHECK(back[i].operation == tasks[i].operation);
  }
}

TEST_CASE("workload file parse errors carry line numbers") {
  const std::string header =
      "task_id,segment_id,duration_s,size_kb,framerate,width,height,kind,parameter\n";

  std::stringstream missing_fields(header + "t1,seg1,2.0,1000\n");
  CHECK_THROWS_AS(read_workload(missing_fields), ParseError);

  std::stringstream bad_kind(header + "t1,seg1,2.0,1000,30,1280,720,blur,512K\n");
  try {
    read_workload(bad_kind);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  std::stringstream bad_param(header +
                              "t1,seg1,2.0,1000,30,1280,720,bitrate,999K\n");
  CHECK_THROWS_AS(read_workload(bad_param), ParseError);

  std::stringstream bad_number(header + "t1,seg1,x,1000,30,1280,720,bitrate,512K\n");
  CHECK_THROWS_AS(read_workload(bad_number), ParseError);
}
