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

#include "sciex/checkpoint.h"

#include "gtest/gtest.h"
#include "sciex/common.h"
#include "testing.h"

namespace sciex {
namespace {

std::unique_ptr<SpanRelationModel> Sample() {
  auto model = testing::MakeModel(testing::ToySchema(), {"Ada", "works", "for", "Initech"}, 6,
                                  4, 5);
  model->set_version(3);
  model->set_metadata({{"note", "fixture"}});
  return model;
}

TEST(CheckpointTest, RoundTripIsStable) {
  const auto model = Sample();
  const std::string bytes = SerializeCheckpoint(*model);
  const auto loaded = ParseCheckpoint(bytes);
  EXPECT_EQ(loaded->schema(), model->schema());
  EXPECT_EQ(loaded->tagset(), model->tagset());
  EXPECT_EQ(loaded->version(), 3);
  EXPECT_EQ(loaded->metadata()["note"], "fixture");
  EXPECT_EQ(loaded->config().ToJson(), model->config().ToJson());
  EXPECT_EQ(SerializeCheckpoint(*loaded), bytes);

  auto& m = const_cast<SpanRelationModel&>(*model);
  auto& l = const_cast<SpanRelationModel&>(*loaded);
  const auto mp = m.Parameters();
  const auto lp = l.Parameters();
  ASSERT_EQ(mp.size(), lp.size());
  for (size_t i = 0; i < mp.size(); ++i) {
    EXPECT_EQ(mp[i]->name, lp[i]->name);
    EXPECT_EQ(mp[i]->shape, lp[i]->shape);
    for (size_t j = 0; j < mp[i]->size(); ++j) {
      EXPECT_EQ(lp[i]->value[j], static_cast<double>(static_cast<float>(mp[i]->value[j])));
    }
  }
}

TEST(CheckpointTest, FileRoundTrip) {
  testing::TempDir dir;
  const auto model = Sample();
  SaveCheckpoint(*model, dir.File("m.ckpt"));
  const auto loaded = LoadCheckpoint(dir.File("m.ckpt"));
  const std::vector<std::string> tokens = {"Ada", "works", "for", "Initech"};
  // Reloading a reloaded model is exact, so outputs agree after one trip.
  const auto again = ParseCheckpoint(SerializeCheckpoint(*loaded));
  const auto a = loaded->Extract(tokens);
  const auto b = again->Extract(tokens);
  ASSERT_EQ(a.entities.size(), b.entities.size());
  for (size_t i = 0; i < a.entities.size(); ++i) {
    EXPECT_EQ(a.entities[i].span, b.entities[i].span);
    EXPECT_EQ(a.entities[i].confidence, b.entities[i].confidence);
  }
}

TEST(CheckpointTest, TamperedPayloadIsDetected) {
  const std::string bytes = SerializeCheckpoint(*Sample());
  for (size_t offset : {bytes.size() - 1, bytes.size() - 200, bytes.size() / 2 + 40}) {
    std::string bad = bytes;
    bad[offset] ^= 0x10;
    EXPECT_THROW(ParseCheckpoint(bad), IntegrityError) << offset;
  }
}

TEST(CheckpointTest, TamperedHeaderIsDetected) {
  const std::string bytes = SerializeCheckpoint(*Sample());
  // Rename an entity type without touching its digest.
  std::string bad = bytes;
  const size_t pos = bad.find("Organization");
  ASSERT_NE(pos, std::string::npos);
  bad[pos] = 'X';
  EXPECT_THROW(ParseCheckpoint(bad), IntegrityError);

  std::string vocab = bytes;
  const size_t vpos = vocab.find("Initech");
  ASSERT_NE(vpos, std::string::npos);
  vocab[vpos] = 'J';
  EXPECT_THROW(ParseCheckpoint(vocab), IntegrityError);
}

TEST(CheckpointTest, TruncationAndJunk) {
  const std::string bytes = SerializeCheckpoint(*Sample());
  EXPECT_THROW(ParseCheckpoint(bytes.substr(0, bytes.size() - 4)), IntegrityError);
  EXPECT_THROW(ParseCheckpoint(bytes.substr(0, 20)), IntegrityError);
  EXPECT_THROW(ParseCheckpoint("hello"), IntegrityError);
  EXPECT_THROW(ParseCheckpoint(bytes + "extra"), IntegrityError);
}

TEST(CheckpointTest, MissingFileIsDataError) {
  EXPECT_THROW(LoadCheckpoint("/nonexistent/model.ckpt"), DataError);
}

}  // namespace
}  // namespace sciex

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  return RUN_ALL_TESTS();
}
