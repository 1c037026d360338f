#include <doctest.h>

#include <numeric>
#include <random>

#include "docsync/crdt/text_doc.hpp"
#include "support/crdt_oracle.hpp"

using namespace docsync;
using docsync::testing::random_causal_order;
using docsync::testing::random_history;
using docsync::testing::replay;
using docsync::testing::tree_oracle;

namespace {

TextDoc doc_with(std::string_view text, ReplicaId replica = 1) {
  TextDoc doc(replica);
  for (char c : text) doc.local_insert(doc.length(), static_cast<char32_t>(c));
  return doc;
}

// Every element's origin is HEAD or sits to its left.
bool origins_precede(const TextDoc& doc) {
  const auto& els = doc.elements();
  for (std::size_t i = 0; i < els.size(); ++i) {
    const Anchor& origin = els[i].op.origin;
    if (origin.is_head()) continue;
    bool found = false;
    for (std::size_t j = 0; j < i; ++j) found = found || els[j].op.id == origin.element();
    if (!found) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("new_doc starts empty") {
  TextDoc doc(1);
  CHECK(doc.visible_text().empty());
  CHECK(doc.version().empty());
  CHECK(doc.lamport_clock() == 0);
  CHECK(TextDoc(7).replica() == 7);
}

TEST_CASE("local_insert") {
  SUBCASE("first insert anchors at head with lamport 1") {
    TextDoc doc(1);
    auto op = doc.local_insert(0, U'a');
    CHECK(op.origin.is_head());
    CHECK(op.lamport == 1);
    CHECK(op.id == OpId{1, 1});
  }
  SUBCASE("insert in the middle uses the left neighbour as origin") {
    TextDoc doc = doc_with("ab");
    OpId a = doc.elements()[0].op.id;
    auto op = doc.local_insert(1, U'x');
    CHECK(op.origin == Anchor::at(a));
    CHECK(doc.visible_text() == "axb");
    CHECK(tree_oracle(doc.all_ops()) == U"axb");
  }
  SUBCASE("lamport clock is monotone") {
    TextDoc doc = doc_with("a");
    auto b = doc.local_insert(1, U'b');
    auto c = doc.local_insert(2, U'c');
    CHECK(c.lamport > b.lamport);
  }
  SUBCASE("out of range index throws") {
    TextDoc doc = doc_with("ab");
    CHECK_THROWS_AS(doc.local_insert(3, U'x'), std::out_of_range);
  }
  SUBCASE("surrogates are rejected") {
    TextDoc doc(1);
    CHECK_THROWS_AS(doc.local_insert(0, char32_t{0xD800}), std::invalid_argument);
  }
}

TEST_CASE("local_delete") {
  SUBCASE("removes the visible character") {
    TextDoc doc = doc_with("ab");
    doc.local_delete(0);
    CHECK(doc.visible_text() == "b");
  }
  SUBCASE("leaves a tombstone behind") {
    TextDoc doc = doc_with("a");
    doc.local_delete(0);
    doc.local_insert(0, U'z');
    CHECK(doc.visible_text() == "z");
    CHECK(doc.element_count() == 2);
    CHECK(tree_oracle(doc.all_ops()) == U"z");
  }
  SUBCASE("empty document rejects delete") {
    TextDoc doc(1);
    CHECK_THROWS_AS(doc.local_delete(0), std::out_of_range);
  }
}

TEST_CASE("integrate: concurrent inserts at head converge to greater key first") {
  TextDoc a(1), b(2);
  auto op_a = a.local_insert(0, U'a');
  auto op_b = b.local_insert(0, U'b');
  REQUIRE(op_a.lamport == 1);
  REQUIRE(op_b.lamport == 1);

  // Brute force: both delivery orders into fresh replicas, plus the two
  // originating replicas receiving the other op.
  std::vector<std::vector<Op>> orders = {{op_a, op_b}, {op_b, op_a}};
  for (const auto& order : orders) {
    CHECK(replay(order).visible_text() == "ba");
  }
  a.integrate(op_b);
  b.integrate(op_a);
  CHECK(a.visible_text() == "ba");
  CHECK(b.visible_text() == "ba");
  CHECK(tree_oracle({op_a, op_b}) == U"ba");
}

TEST_CASE("integrate: duplicates are no-ops") {
  TextDoc src(1);
  auto op = src.local_insert(0, U'q');
  TextDoc dst(2);
  CHECK(dst.integrate(op) == IntegrationResult::applied);
  CHECK(dst.integrate(op) == IntegrationResult::duplicate);
  CHECK(dst.visible_text() == "q");
  CHECK(dst.element_count() == 1);
}

TEST_CASE("integrate: delete before its insert is buffered") {
  TextDoc src(1);
  auto ins = src.local_insert(0, U'x');
  src.local_insert(1, U'y');
  auto del = src.local_delete(0);
  auto y = *src.find_op(OpId{1, 2});

  TextDoc in_order = replay({ins, y, del});

  TextDoc dst(2);
  CHECK(dst.integrate(del) == IntegrationResult::buffered);
  CHECK(dst.integrate(y) == IntegrationResult::buffered);
  CHECK(dst.pending_count() == 2);
  CHECK(dst.integrate(ins) == IntegrationResult::applied);
  CHECK(dst.pending_count() == 0);
  CHECK(dst.visible_text() == in_order.visible_text());
  CHECK(dst.visible_text() == "y");
  CHECK(dst.version() == in_order.version());
}

TEST_CASE("visible_text") {
  CHECK(TextDoc(1).visible_text().empty());
  TextDoc doc(1);
  doc.local_insert(0, U'h');
  doc.local_insert(1, U'i');
  CHECK(doc.visible_text() == "hi");
  doc.local_delete(0);
  CHECK(doc.visible_text() == "i");

  TextDoc wide(1);
  wide.local_insert(0, U'é');
  wide.local_insert(1, U'\U0001F600');
  CHECK(wide.visible_text() == "\xC3\xA9\xF0\x9F\x98\x80");
  CHECK(wide.length() == 2);
}

TEST_CASE("ops_since") {
  SUBCASE("no diff against own version") {
    TextDoc doc = doc_with("abc");
    CHECK(doc.ops_since(doc.version()).empty());
  }
  SUBCASE("full diff replicates text and version") {
    std::mt19937_64 rng(7);
    TextDoc a(1), b(2);
    for (int i = 0; i < 40; ++i) {
      a.local_insert(std::uniform_int_distribution<std::size_t>(0, a.length())(rng), U'a' + i % 26);
      if (i % 3 == 0) a.local_delete(0);
      b.local_insert(0, U'B');
    }
    for (const Op& op : b.all_ops()) a.integrate(op);
    TextDoc fresh = replay(a.ops_since(VersionVector{}));
    CHECK(fresh.visible_text() == a.visible_text());
    CHECK(fresh.version() == a.version());
    CHECK(fresh.pending_count() == 0);
  }
  SUBCASE("set difference against a partial version") {
    TextDoc doc(1);
    doc.local_insert(0, U'a');
    doc.local_insert(1, U'b');
    TextDoc other(2);
    doc.integrate(other.local_insert(0, U'c'));
    VersionVector since;
    since.set(1, 1);
    auto diff = doc.ops_since(since);
    REQUIRE(diff.size() == 2);
    CHECK(op_id(diff[0]) == OpId{1, 2});
    CHECK(op_id(diff[1]) == OpId{2, 1});
  }
}

TEST_CASE("cursor anchors") {
  TextDoc doc = doc_with("ab");
  CHECK(doc.index_to_anchor(0).is_head());
  CHECK(doc.index_to_anchor(2) == Anchor::at(doc.elements()[1].op.id));
  CHECK_THROWS_AS(doc.index_to_anchor(3), std::out_of_range);

  TextDoc abc = doc_with("abc");
  CHECK(abc.anchor_to_index(Anchor::head()) == 0);
  CHECK(abc.anchor_to_index(Anchor::at(abc.elements()[0].op.id)) == 1);
  CHECK_THROWS_AS(abc.anchor_to_index(Anchor::at(OpId{9, 9})), std::out_of_range);

  TextDoc sole = doc_with("x");
  Anchor on_x = sole.index_to_anchor(1);
  sole.local_delete(0);
  CHECK(sole.anchor_to_index(on_x) == 0);

  TextDoc mid = doc_with("abc");
  Anchor on_b = mid.index_to_anchor(2);
  mid.local_delete(1);
  CHECK(mid.anchor_to_index(on_b) == 1);
}

TEST_CASE("anchor roundtrip is exhaustive for lengths up to 50") {
  std::mt19937_64 rng(3);
  TextDoc doc(1);
  for (std::size_t len = 0; len <= 50; ++len) {
    for (std::size_t i = 0; i <= doc.length(); ++i) {
      REQUIRE(doc.anchor_to_index(doc.index_to_anchor(i)) == i);
    }
    // Grow with a mix of inserts and tombstones so anchors skip deleted runs.
    doc.local_insert(std::uniform_int_distribution<std::size_t>(0, doc.length())(rng), U'k');
    if (len % 4 == 3) {
      doc.local_delete(std::uniform_int_distribution<std::size_t>(0, doc.length() - 1)(rng));
      doc.local_insert(doc.length(), U'm');
    }
  }
}

TEST_CASE("property: random causal orders converge to the tree oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t replicas = 1 + trial % 4;
    auto ops = random_history(rng, replicas, 1 + rng() % 80);
    auto expected = tree_oracle(ops);
    TextDoc first = replay(random_causal_order(ops, rng), 100);
    TextDoc second = replay(random_causal_order(ops, rng), 101);
    REQUIRE(first.visible_codepoints() == expected);
    REQUIRE(second.visible_codepoints() == expected);
    REQUIRE(first.version() == second.version());
    REQUIRE(origins_precede(first));
  }
}

TEST_CASE("property: arbitrary delivery order is repaired by the causal buffer") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    auto ops = random_history(rng, 3, 60);
    auto shuffled = ops;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    TextDoc doc(100);
    for (const Op& op : shuffled) {
      doc.integrate(op);
      REQUIRE(origins_precede(doc));
    }
    REQUIRE(doc.pending_count() == 0);
    REQUIRE(doc.visible_codepoints() == tree_oracle(ops));
  }
}

TEST_CASE("property: re-applying integrated ops changes nothing") {
  std::mt19937_64 rng(13);
  auto ops = random_history(rng, 3, 120);
  TextDoc doc = replay(ops);
  auto text = doc.visible_text();
  auto version = doc.version();
  auto elements = doc.element_count();
  for (const Op& op : ops) CHECK(doc.integrate(op) == IntegrationResult::duplicate);
  CHECK(doc.visible_text() == text);
  CHECK(doc.version() == version);
  CHECK(doc.element_count() == elements);
}

TEST_CASE("property: ops_since brings a lagging replica up to date") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    auto ops = random_history(rng, 3, 100);
    TextDoc full = replay(ops, 50);
    auto order = random_causal_order(ops, rng);
    std::size_t cut = std::uniform_int_distribution<std::size_t>(0, order.size())(rng);
    TextDoc lagging = replay(std::vector<Op>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut)), 51);
    for (const Op& op : full.ops_since(lagging.version())) lagging.integrate(op);
    REQUIRE(lagging.visible_text() == full.visible_text());
    REQUIRE(lagging.version() == full.version());
  }
}

TEST_CASE("utf8 helpers reject malformed input") {
  CHECK(valid_utf8("plain"));
  CHECK(valid_utf8("\xE2\x82\xAC"));
  CHECK_FALSE(valid_utf8("\xC0\xAF"));      // overlong
  CHECK_FALSE(valid_utf8("\xED\xA0\x80"));  // surrogate
  CHECK_FALSE(valid_utf8("\xE2\x82"));      // truncated
  CHECK_FALSE(valid_utf8("\xFF"));
}

TEST_CASE("exhaustive: every causal permutation of small op sets matches the oracle") {
  std::mt19937_64 rng(15);
  for (int set = 0; set < 60; ++set) {
    auto ops = random_history(rng, 1 + set % 3, 1 + set % 6);
    auto expected = tree_oracle(ops);

    // Ascending (lamport, replica) is itself causal; inserts carry lamport,
    // deletes follow every insert.
    auto sorted = ops;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Op& a, const Op& b) {
      auto key = [](const Op& op) {
        if (const auto* ins = std::get_if<InsertOp>(&op)) return std::tuple(0, ins->lamport, ins->id.replica);
        return std::tuple(1, op_id(op).seq, op_id(op).replica);
      };
      return key(a) < key(b);
    });
    REQUIRE(replay(sorted).visible_codepoints() == expected);

    std::vector<std::size_t> perm(ops.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t valid = 0;
    do {
      std::vector<Op> order;
      for (std::size_t i : perm) order.push_back(ops[i]);
      if (!docsync::testing::causally_valid(order)) continue;
      ++valid;
      REQUIRE(replay(order).visible_codepoints() == expected);
    } while (std::next_permutation(perm.begin(), perm.end()));
    REQUIRE(valid >= 1);
  }
}
