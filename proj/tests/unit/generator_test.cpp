#include "ganinv/generator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ganinv/errors.hpp"
#include "test_support.hpp"

namespace ganinv {
namespace {

namespace fs = std::filesystem;

std::vector<double> flat_weights(const GeneratorNetwork& net) {
  std::vector<double> all;
  for (const auto& layer : net.layers()) {
    if (const auto* a = std::get_if<AffineLayer>(&layer)) {
      all.insert(all.end(), a->weight.begin(), a->weight.end());
    } else if (const auto* c = std::get_if<TransposedConv2dLayer>(&layer)) {
      all.insert(all.end(), c->kernel.begin(), c->kernel.end());
    }
  }
  return all;
}

double sample_stddev(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return std::sqrt(v / static_cast<double>(xs.size() - 1));
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ganinv_gen_" + std::string(::testing::UnitTest::GetInstance()
                                            ->current_test_info()
                                            ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

TEST(Build, IsDeterministic) {
  EXPECT_EQ(build(reference_mlp_spec()), build(reference_mlp_spec()));
  EXPECT_EQ(build(reference_dcgan_spec()), build(reference_dcgan_spec()));
}

TEST(Build, DifferentSeedsGiveDifferentNetworks) {
  EXPECT_NE(flat_weights(build(reference_mlp_spec(1))),
            flat_weights(build(reference_mlp_spec(2))));
  EXPECT_NE(flat_weights(build(reference_dcgan_spec(1))),
            flat_weights(build(reference_dcgan_spec(2))));
}

TEST(Build, SmallestMlpIsOneAffineThenTanh) {
  GeneratorSpec spec;
  spec.latent_dim = 2;
  spec.output_shape = Shape{1, 1, 2};
  spec.seed = 3;
  const auto net = build(spec);
  ASSERT_EQ(net.layers().size(), 2u);
  const auto& a = std::get<AffineLayer>(net.layers()[0]);
  EXPECT_EQ(a.in, 2u);
  EXPECT_EQ(a.out, 2u);
  EXPECT_EQ(a.bias, (std::vector<double>{0.0, 0.0}));
  const auto& act = std::get<ActivationLayer>(net.layers()[1]);
  EXPECT_EQ(act.fn, Activation::tanh);
  EXPECT_EQ(net.latent_dim(), 2u);
}

TEST(Build, AffineWeightsHaveInverseSqrtFanInScale) {
  const auto net = build(reference_mlp_spec(42));
  const auto& first = std::get<AffineLayer>(net.layers()[0]);
  const auto& second = std::get<AffineLayer>(net.layers()[2]);
  // 12800 and 32768 samples: the sample stddev is within a few percent.
  EXPECT_NEAR(sample_stddev(first.weight), 1.0 / std::sqrt(100.0), 0.004);
  EXPECT_NEAR(sample_stddev(second.weight), 1.0 / std::sqrt(128.0), 0.003);
  for (double b : second.bias) EXPECT_EQ(b, 0.0);
}

TEST(Build, DcganGeometryAndKernelScale) {
  const auto net = build(reference_dcgan_spec(42));
  ASSERT_EQ(net.layers().size(), 6u);
  const auto& proj = std::get<AffineLayer>(net.layers()[0]);
  EXPECT_EQ(proj.out, 32u * 4 * 4);
  const auto& up1 = std::get<TransposedConv2dLayer>(net.layers()[2]);
  EXPECT_EQ(up1.in_channels, 32u);
  EXPECT_EQ(up1.out_channels, 16u);
  EXPECT_EQ(up1.out_height(), 8u);
  const auto& up2 = std::get<TransposedConv2dLayer>(net.layers()[4]);
  EXPECT_EQ(up2.out_channels, 1u);
  EXPECT_EQ(up2.out_height(), 16u);
  EXPECT_EQ(std::get<ActivationLayer>(net.layers()[1]).fn, Activation::relu);
  EXPECT_EQ(std::get<ActivationLayer>(net.layers()[5]).fn, Activation::tanh);
  EXPECT_NEAR(sample_stddev(up1.kernel), 0.02, 0.001);
}

TEST(Build, RejectsInvalidSpecs) {
  GeneratorSpec spec = reference_mlp_spec();
  spec.latent_dim = 0;
  EXPECT_THROW(build(spec), ConfigError);

  spec = reference_mlp_spec();
  spec.output_shape = Shape{1, 8, 8};  // 64 < 100
  EXPECT_THROW(build(spec), ConfigError);

  spec = reference_mlp_spec();
  spec.output_shape = Shape{3, 16, 16};
  EXPECT_THROW(build(spec), ConfigError);

  spec = reference_mlp_spec();
  spec.hidden_sizes = {0};
  EXPECT_THROW(build(spec), ConfigError);

  spec = reference_dcgan_spec();
  spec.output_shape = Shape{1, 18, 18};
  EXPECT_THROW(build(spec), ConfigError);
}

TEST(Golden, ReferenceMlpWeightFingerprint) {
  // Pinned after the determinism tests above passed.
  EXPECT_NEAR(weight_fingerprint(build(reference_mlp_spec(42))), 18.466793492941036, 1e-9);
}

TEST(Fnv1a, KnownVectors) {
  // Published FNV-1a 64 test vectors.
  EXPECT_EQ(fnv1a64({}), 0xcbf29ce484222325ULL);
  const unsigned char a[] = {'a'};
  EXPECT_EQ(fnv1a64(a), 0xaf63dc4c8601ec8cULL);
  const unsigned char foobar[] = {'f', 'o', 'o', 'b', 'a', 'r'};
  EXPECT_EQ(fnv1a64(foobar), 0x85944171f73967e8ULL);
}

TEST(Serialize, HeaderIsHumanReadable) {
  const std::string bytes = serialize(build(reference_mlp_spec(42)));
  ASSERT_EQ(bytes.rfind("GENNET v1 {", 0), 0u);
  const auto nl = bytes.find('\n');
  const std::string header = bytes.substr(0, nl);
  EXPECT_NE(header.find("\"architecture\":\"mlp\""), std::string::npos);
  EXPECT_NE(header.find("\"seed\":42"), std::string::npos);
  // payload: (100*128 + 128 + 128*256 + 256) doubles, plus 8-byte checksum
  EXPECT_EQ(bytes.size() - nl - 1, (12800u + 128 + 32768 + 256) * 8 + 8);
}

TEST(Serialize, RoundTripIsBitwiseIdentity) {
  Rng rng(5);
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto net = build(testing::random_spec(seed, rng));
    const auto back = deserialize(serialize(net));
    EXPECT_EQ(back, net);
    EXPECT_EQ(serialize(back), serialize(net));
  }
}

TEST(Serialize, HandBuiltNetworkWithoutSpecRoundTrips) {
  const auto net = testing::identity_tanh(3);
  const auto back = deserialize(serialize(net));
  EXPECT_EQ(back, net);
  EXPECT_FALSE(back.spec().has_value());
}

TEST(Deserialize, EveryTruncationIsAFormatError) {
  GeneratorSpec spec;
  spec.latent_dim = 2;
  spec.hidden_sizes = {3};
  spec.output_shape = Shape{1, 1, 4};
  const std::string bytes = serialize(build(spec));
  for (std::size_t len = 0; len < bytes.size(); ++len) {
    EXPECT_THROW(deserialize(std::string_view(bytes).substr(0, len)), FormatError) << len;
  }
}

TEST(Deserialize, EditedDimensionIsRejected) {
  std::string bytes = serialize(build(reference_mlp_spec(42)));
  const auto pos = bytes.find("\"out\":256");
  ASSERT_NE(pos, std::string::npos);
  bytes.replace(pos, 9, "\"out\":255");
  try {
    deserialize(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.field(), "layers");
  }
}

TEST(Deserialize, VersionMismatchNamesVersion) {
  std::string bytes = serialize(testing::identity_tanh(2));
  bytes[8] = '2';
  try {
    deserialize(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.field(), "version");
  }
}

TEST(Deserialize, CorruptPayloadFailsChecksum) {
  std::string bytes = serialize(testing::identity_tanh(2));
  const auto nl = bytes.find('\n');
  bytes[nl + 5] ^= 0x01;
  try {
    deserialize(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.field(), "checksum");
  }
}

TEST(Deserialize, MissingFieldIsNamed) {
  std::string bytes = serialize(testing::identity_tanh(2));
  const auto pos = bytes.find("\"seed\":0");
  ASSERT_NE(pos, std::string::npos);
  bytes.replace(pos, 8, "\"sead\":0");
  try {
    deserialize(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.field(), "seed");
  }
}

TEST_F(TempDir, SaveLoadRoundTrip) {
  const auto net = build(reference_dcgan_spec(7));
  const auto path = dir_ / "g.net";
  save(net, path);
  EXPECT_EQ(load(path), net);
  save(net, dir_ / "h.net");
  std::ifstream a(path, std::ios::binary), b(dir_ / "h.net", std::ios::binary);
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}),
            std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST_F(TempDir, MissingOrUnwritablePathsAreFormatErrors) {
  EXPECT_THROW(load(dir_ / "absent.net"), FormatError);
  EXPECT_THROW(save(testing::identity_tanh(2), dir_ / "no" / "such" / "dir.net"), FormatError);
}

}  // namespace
}  // namespace ganinv
