// Copyright 2026 The Sciex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sciex/extractor.h"

#include <cmath>
#include <numeric>

#include "gtest/gtest.h"
#include "sciex/common.h"
#include "testing.h"

namespace sciex {
namespace {

TEST(EnumerateSpansTest, SmallCases) {
  EXPECT_EQ(EnumerateSpans(3, 10).size(), 6u);
  EXPECT_EQ(EnumerateSpans(12, 10).size(), 75u);
  EXPECT_TRUE(EnumerateSpans(0, 10).empty());
  const auto spans = EnumerateSpans(3, 2);
  const std::vector<SpanCandidate> want = {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}};
  EXPECT_EQ(spans, want);
}

TEST(EnumerateSpansTest, MatchesDoubleLoop) {
  for (int n = 0; n <= 30; ++n) {
    for (int l = 1; l <= 10; ++l) {
      std::vector<SpanCandidate> brute;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
          if (j - i <= l) brute.push_back({i, j});
        }
      }
      EXPECT_EQ(EnumerateSpans(n, l), brute) << n << " " << l;
    }
  }
}

TEST(FeatureDimTest, ClosedForms) {
  EXPECT_EQ(SpanFeatureDim(64, 64), 213u);
  EXPECT_EQ(RelationFeatureDim(64), 362u);
  EXPECT_EQ(SpanFeatureDim(8, 3, 4, 5), 8u + 24u + 5u + 3u);
  EXPECT_EQ(RelationFeatureDim(8, 4, 5), 24u + 48u + 10u);
}

TEST(FeatureDimTest, BuiltVectorsMatch) {
  const auto schema = testing::ToySchema();
  Rng rng(8);
  for (int trial = 0; trial < 4; ++trial) {
    const int d_tok = trial == 0 ? 64 : 1 + static_cast<int>(rng.Below(40));
    const int d_sent = trial == 0 ? 64 : 1 + static_cast<int>(rng.Below(40));
    auto model = testing::MakeModel(schema, {"a", "b"}, d_tok, d_sent, trial);
    const std::vector<std::string> tokens = {"a", "b", "a", "b", "a", "b", "a"};
    const auto enc = model->encoder().Encode(tokens);
    const auto codes = model->TagCodes(tokens);
    const auto xs = SpanFeatures({1, 3}, enc, codes, model->widths());
    EXPECT_EQ(xs.size(), SpanFeatureDim(d_tok, d_sent));
    EXPECT_EQ(model->span_classifier().in_dim(), xs.size());
    const auto xr = RelationFeatures({0, 2}, {4, 6}, enc, codes, model->widths());
    EXPECT_EQ(xr.size(), RelationFeatureDim(d_tok));
    EXPECT_EQ(model->relation_classifier().in_dim(), xr.size());
    EXPECT_EQ(model->span_classifier().out_dim(), 4u);
    EXPECT_EQ(model->relation_classifier().out_dim(), 2u);
  }
}

TEST(MaxPoolTest, ElementwiseMax) {
  Matrix m(2, 2);
  m.at(0, 0) = 1;
  m.at(0, 1) = -2;
  m.at(1, 0) = 0;
  m.at(1, 1) = 5;
  const auto p = MaxPool(m, 0, 2);
  EXPECT_EQ(p.values, (std::vector<double>{1, 5}));
  EXPECT_EQ(p.argmax, (std::vector<int>{0, 1}));
  const auto single = MaxPool(m, 1, 2);
  EXPECT_EQ(single.values, (std::vector<double>{0, 5}));
  const auto empty = MaxPool(m, 1, 1);
  EXPECT_EQ(empty.values, (std::vector<double>{0, 0}));
  EXPECT_EQ(empty.argmax, (std::vector<int>{-1, -1}));
}

TEST(MaxPoolTest, TiesGoToFirstRow) {
  Matrix m(3, 1, 2.0);
  EXPECT_EQ(MaxPool(m, 0, 3).argmax[0], 0);
  Matrix g(3, 1);
  const std::vector<double> grad = {1.5};
  MaxPoolBackward(MaxPool(m, 0, 3), grad, &g);
  EXPECT_EQ(g.data, (std::vector<double>{1.5, 0, 0}));
}

TEST(SpanFeaturesTest, BlockLayout) {
  const auto schema = testing::ToySchema();
  auto model = testing::MakeModel(schema, {"the", "gel", "was", "aged"}, 4, 3);
  const std::vector<std::string> tokens = {"the", "gel", "was", "aged"};
  const auto enc = model->encoder().Encode(tokens);
  const auto codes = model->TagCodes(tokens);
  const SpanCandidate span{1, 3};
  const auto x = SpanFeatures(span, enc, codes, model->widths());
  const auto pooled = MaxPool(enc.tokens, 1, 3);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(x[i], pooled.values[i]);
  const std::vector<int> span_codes = {codes[1], codes[2]};
  const auto bits = EncodePosCodes(span_codes);
  for (int i = 0; i < 60; ++i) EXPECT_EQ(x[4 + i], bits[i]);
  const auto w = model->widths().Lookup(2);
  for (int i = 0; i < 25; ++i) EXPECT_EQ(x[64 + i], w[i]);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(x[89 + i], enc.sentence[i]);

  // Width-1 pools to the token itself.
  const auto x1 = SpanFeatures({2, 3}, enc, codes, model->widths());
  for (int i = 0; i < 4; ++i) EXPECT_EQ(x1[i], enc.tokens.at(2, i));
}

TEST(RelationFeaturesTest, AdjacentEntitiesHaveEmptyContext) {
  const auto schema = testing::ToySchema();
  auto model = testing::MakeModel(schema, {"a", "b", "c"}, 4, 3);
  const std::vector<std::string> tokens = {"a", "b", "c"};
  const auto enc = model->encoder().Encode(tokens);
  const auto codes = model->TagCodes(tokens);
  const auto x = RelationFeatures({0, 1}, {1, 3}, enc, codes, model->widths());
  for (int i = 8; i < 12; ++i) EXPECT_EQ(x[i], 0.0);        // context pool
  for (int i = 72; i < 132; ++i) EXPECT_EQ(x[i], 0.0);      // context POS
  EXPECT_EQ(ContextBetween({0, 1}, {1, 3}).width(), 0);
  EXPECT_EQ(ContextBetween({0, 2}, {1, 3}).width(), 0);
  EXPECT_EQ(ContextBetween({3, 4}, {0, 1}), (SpanCandidate{1, 3}));
}

TEST(RelationFeaturesTest, SwapChangesVector) {
  const auto schema = testing::ToySchema();
  auto model = testing::MakeModel(schema, {"Ada", "works", "for", "big", "Initech"}, 4, 3);
  const std::vector<std::string> tokens = {"Ada", "works", "for", "big", "Initech"};
  const auto enc = model->encoder().Encode(tokens);
  const auto codes = model->TagCodes(tokens);
  const auto fwd = RelationFeatures({0, 1}, {3, 5}, enc, codes, model->widths());
  const auto rev = RelationFeatures({3, 5}, {0, 1}, enc, codes, model->widths());
  EXPECT_NE(fwd, rev);
  // Head and tail pools swap places.
  for (int i = 0; i < 4; ++i) EXPECT_EQ(fwd[i], rev[4 + i]);
}

TEST(RelationFeaturesTest, PosSlotLayout) {
  const std::vector<int> codes = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17,
                                  18, 19, 20};
  // Head 0..7 (8 tokens), tail 18..20.
  EXPECT_EQ(PairPosSlots({0, 7}, {17, 20}, codes),
            (std::vector<int>{1, 2, 3, 4, 5, 18, 19, 20, 0, 0}));
  // Context 7..17 has 10 tokens: first five left, last five right-aligned.
  EXPECT_EQ(ContextPosSlots({0, 7}, {17, 20}, codes),
            (std::vector<int>{8, 9, 10, 11, 12, 13, 14, 15, 16, 17}));
  // Short context: 3 tokens, all on the left.
  EXPECT_EQ(ContextPosSlots({0, 2}, {5, 6}, codes),
            (std::vector<int>{3, 4, 5, 0, 0, 0, 0, 0, 0, 0}));
  // Seven tokens: five left, two right-aligned.
  EXPECT_EQ(ContextPosSlots({0, 1}, {8, 9}, codes),
            (std::vector<int>{2, 3, 4, 5, 6, 0, 0, 0, 7, 8}));
}

TEST(ClassifySpansTest, TieGoesToNone) {
  const std::vector<SpanCandidate> spans = {{0, 1}};
  const auto p = ClassifySpans(spans, {{0.3, 0.3, 0.3, 0.3}});
  EXPECT_EQ(p[0].label, 0);
  EXPECT_NEAR(p[0].probability, 0.25, 1e-12);
  EXPECT_EQ(ArgMax(std::vector<double>{1, 3, 3}), 1u);
}

TEST(ClassifySpansTest, DominantLogit) {
  const std::vector<SpanCandidate> spans = {{0, 1}};
  const auto p = ClassifySpans(spans, {{0, 10, 0, 0, 0}});
  EXPECT_EQ(p[0].label, 1);
  EXPECT_GT(p[0].probability, 0.999);
}

TEST(ClassifySpansTest, SoftmaxSumsToOne) {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> z(1 + rng.Below(8));
    for (double& v : z) v = rng.Uniform(-50, 50);
    const auto p = Softmax(z);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
    for (double v : p) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
  }
  const auto big = Softmax(std::vector<double>{1000, 1000});
  EXPECT_NEAR(big[0], 0.5, 1e-12);
}

TEST(PairCandidatesTest, OrderedWithoutSelfPairs) {
  EXPECT_EQ(PairCandidates(3).size(), 6u);
  EXPECT_TRUE(PairCandidates(1).empty());
  EXPECT_TRUE(PairCandidates(0).empty());
  for (const auto& [h, t] : PairCandidates(7)) EXPECT_NE(h, t);
  EXPECT_EQ(PairCandidates(7).size(), 42u);
}

TEST(ThresholdTest, FixedCases) {
  EXPECT_EQ(DecideRelation(std::vector<double>{0.35, 0.20}, 0.4).type, -1);
  const auto d = DecideRelation(std::vector<double>{0.9, 0.5}, 0.4);
  EXPECT_EQ(d.type, 0);
  EXPECT_DOUBLE_EQ(d.score, 0.9);
  EXPECT_EQ(DecideRelation(std::vector<double>{0.4}, 0.4).type, -1);
  EXPECT_EQ(DecideRelation(std::vector<double>{0.2, 0.7, 0.7}, 0.4).type, 1);
  EXPECT_EQ(DecideRelation(std::vector<double>{}, 0.4).type, -1);
}

TEST(ThresholdTest, NeverEmitsAtOrBelowThreshold) {
  Rng rng(12);
  std::vector<std::pair<int, int>> pairs = PairCandidates(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> scores;
    for (size_t i = 0; i < pairs.size(); ++i) {
      std::vector<double> s(3);
      for (double& v : s) v = rng.Below(4) == 0 ? 0.4 : rng.Uniform();
      scores.push_back(s);
    }
    const auto rels = ClassifyRelations(pairs, scores, 0.4);
    std::set<std::pair<int, int>> seen;
    for (const auto& r : rels) {
      EXPECT_GT(r.score, 0.4);
      EXPECT_TRUE(seen.insert({r.head, r.tail}).second);
    }
  }
}

TEST(ExtractTest, EmptySentence) {
  auto model = testing::MakeModel(testing::ToySchema(), {"a"});
  const auto e = model->Extract(std::vector<std::string>{});
  EXPECT_TRUE(e.entities.empty());
  EXPECT_TRUE(e.relations.empty());
}

TEST(ExtractTest, AllNoneGivesNothing) {
  auto model = testing::MakeModel(testing::ToySchema(), {"a", "b"});
  model->span_classifier().bias().value[0] = 1e3;
  const std::vector<std::string> tokens = {"a", "b", "a"};
  const auto e = model->Extract(tokens);
  EXPECT_TRUE(e.entities.empty());
  EXPECT_TRUE(e.relations.empty());
}

TEST(ExtractTest, TooLongSentenceIsDataError) {
  auto model = testing::MakeModel(testing::ToySchema(), {"a"});
  const std::vector<std::string> tokens(257, "a");
  EXPECT_THROW(model->Extract(tokens), DataError);
}

TEST(ExtractTest, OutputAlwaysValidates) {
  const auto schema = testing::ToySchema();
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    auto model = testing::MakeModel(schema, {"a", "b", "c", "d"}, 6, 4, trial);
    // Push some spans over to entities and most pairs over the threshold.
    model->span_classifier().bias().value[0] = -1.0;
    model->relation_classifier().bias().value[0] = 2.0;
    std::vector<std::string> tokens;
    const int n = 1 + static_cast<int>(rng.Below(15));
    for (int i = 0; i < n; ++i) tokens.push_back(std::string(1, "abcd"[rng.Below(4)]));
    const auto ex = model->Extract(tokens);
    Sentence s = ex.ToSentence(tokens);
    EXPECT_NO_THROW(ValidateSentence(s, schema, 0));
    for (const auto& e : ex.entities) {
      EXPECT_LE(e.span.width(), 10);
      EXPECT_GT(e.confidence, 0.0);
    }
    for (const auto& r : ex.relations) EXPECT_GT(r.confidence, 0.4);
  }
}

TEST(ExtractTest, SymmetricPairReportedOnce) {
  ExtractionSchema schema({"Drug"}, {"Interacts"}, {"Interacts"});
  auto model = testing::MakeModel(schema, {"x", "y"}, 4, 3);
  // Every span becomes an entity and every pair scores above threshold.
  model->span_classifier().bias().value[1] = 1e3;
  model->relation_classifier().bias().value[0] = 1e3;
  const std::vector<std::string> tokens = {"x", "y"};
  const auto ex = model->Extract(tokens);
  ASSERT_EQ(ex.entities.size(), 3u);
  EXPECT_EQ(ex.relations.size(), 3u);  // 6 ordered pairs, 3 unordered
}

TEST(LinearLayerTest, ForwardBackward) {
  LinearLayer layer("probe", 3, 2);
  layer.weight().value = {1, 2, 3, 4, 5, 6};
  layer.bias().value = {0.5, -0.5};
  const std::vector<double> x = {1, 0, -1};
  EXPECT_EQ(layer.Forward(x), (std::vector<double>{-1.5, -2.5}));
  layer.weight().ZeroGrad();
  layer.bias().ZeroGrad();
  std::vector<double> dx(3, 0.0);
  const std::vector<double> dy = {1, 2};
  layer.Backward(x, dy, &dx);
  EXPECT_EQ(dx, (std::vector<double>{9, 12, 15}));
  EXPECT_EQ(layer.weight().grad, (std::vector<double>{1, 0, -1, 2, 0, -2}));
  EXPECT_EQ(layer.bias().grad, (std::vector<double>{1, 2}));
}

TEST(ModelTest, CopyIsDeep) {
  auto model = testing::MakeModel(testing::ToySchema(), {"a"});
  SpanRelationModel copy(*model);
  copy.span_classifier().bias().value[0] += 1.0;
  EXPECT_NE(copy.span_classifier().bias().value[0], model->span_classifier().bias().value[0]);
  EXPECT_EQ(copy.Parameters().size(), model->Parameters().size());
}

TEST(ModelTest, GoldTagsTakePrecedence) {
  auto model = testing::MakeModel(testing::ToySchema(), {"the"});
  const std::vector<std::string> tokens = {"the"};
  const std::vector<std::string> gold = {"NN"};
  EXPECT_EQ(model->TagCodes(tokens)[0], PennTreebankTagset().Code("DT"));
  EXPECT_EQ(model->TagCodes(tokens, gold)[0], PennTreebankTagset().Code("NN"));
}

}  // namespace
}  // namespace sciex

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  return RUN_ALL_TESTS();
}
