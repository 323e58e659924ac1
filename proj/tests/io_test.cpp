#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glrr/config.hpp"
#include "glrr/dataset.hpp"
#include "glrr/io.hpp"
#include "glrr/rng.hpp"
#include "glrr/synthetic.hpp"

namespace {

using glrr::Config;
using glrr::InvalidInput;
using glrr::Matrix;
using glrr::RetrievalDataset;
using glrr::SchemaError;
using glrr::SyntheticSpec;
using glrr::Vector;

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::path(::testing::TempDir()) / name;
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

TEST(NumberFormat, RoundTripsRandomDoublesBitForBit) {
  glrr::Rng rng(7);
  int checked = 0;
  while (checked < 2000) {
    const double exponent = (rng.uniform() - 0.5) * 560.0;  // ~1e-280..1e280
    const double x = rng.normal() * std::pow(10.0, exponent);
    if (!std::isfinite(x)) continue;
    const std::string text = glrr::format_double(x);
    const double back = glrr::parse_double(text, "round-trip");
    EXPECT_TRUE(same_bits(back, x)) << text;
    ++checked;
  }
}

TEST(NumberFormat, UsesShortestExactDecimal) {
  EXPECT_EQ(glrr::format_double(0.1), "0.1");
  EXPECT_EQ(glrr::format_double(1.0), "1");
  EXPECT_EQ(glrr::format_double(-2.5), "-2.5");
  EXPECT_TRUE(same_bits(glrr::parse_double(glrr::format_double(1.0 / 3.0),
                                           "third"),
                        1.0 / 3.0));
  EXPECT_TRUE(same_bits(glrr::parse_double(glrr::format_double(1e-300),
                                           "tiny"),
                        1e-300));
}

TEST(NumberFormat, ParseTrimsAndRejectsTrailingGarbage) {
  EXPECT_EQ(glrr::parse_double(" 1.5\r", "t"), 1.5);
  EXPECT_EQ(glrr::parse_double("\t2e3 ", "t"), 2000.0);
  EXPECT_THROW(glrr::parse_double("", "t"), InvalidInput);
  EXPECT_THROW(glrr::parse_double("abc", "t"), InvalidInput);
  EXPECT_THROW(glrr::parse_double("1.5x", "t"), InvalidInput);
  EXPECT_THROW(glrr::parse_double("--1", "t"), InvalidInput);
  try {
    glrr::parse_double("bogus", "band_3");
    FAIL() << "expected InvalidInput";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("band_3"), std::string::npos);
  }
}

TEST(AtomicWrite, WritesReadsAndOverwritesWithoutLeftovers) {
  const auto path = temp_path("atomic_write.txt");
  glrr::atomic_write_text(path, "hello\n");
  EXPECT_EQ(glrr::read_text(path), "hello\n");
  glrr::atomic_write_text(path, "replaced");
  EXPECT_EQ(glrr::read_text(path), "replaced");
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);
}

const char* const kWellFormedCsv =
    "# produced by hand for the parser test\n"
    "id,band_1,band_2,band_3,band_4,aeronet_aod,baseline_aod\n"
    "s0,0.5,1.5,-2,0.25,0.4,0.38\n"
    "s1,1,2,3,4,0.9,1.1\n"
    "s2,-1,-2,-3,-4,0.1,0.05\n";

TEST(LoadCsv, ParsesWellFormedFile) {
  const auto path = temp_path("well_formed.csv");
  glrr::atomic_write_text(path, kWellFormedCsv);
  const RetrievalDataset ds = glrr::load_csv(path);
  EXPECT_EQ(ds.n(), 3);
  EXPECT_EQ(ds.d(), 4);
  EXPECT_EQ(ds.dropped_rows, 0);
  EXPECT_EQ(ds.ids, (std::vector<std::string>{"s0", "s1", "s2"}));
  EXPECT_EQ(ds.spectra(0, 0), 0.5);
  EXPECT_EQ(ds.spectra(3, 0), 0.25);
  EXPECT_EQ(ds.spectra(2, 2), -3.0);
  EXPECT_EQ(ds.aeronet(1), 0.9);
  EXPECT_EQ(ds.baseline(2), 0.05);
  std::filesystem::remove(path);
}

TEST(LoadCsv, FindsColumnsByNameNotPosition) {
  const auto path = temp_path("shuffled_columns.csv");
  glrr::atomic_write_text(path,
                          "baseline_aod,band_2,id,aeronet_aod,band_1\n"
                          "0.3,20,a,0.4,10\n"
                          "0.6,21,b,0.7,11\n");
  const RetrievalDataset ds = glrr::load_csv(path);
  EXPECT_EQ(ds.d(), 2);
  EXPECT_EQ(ds.ids[0], "a");
  EXPECT_EQ(ds.spectra(0, 0), 10.0);
  EXPECT_EQ(ds.spectra(1, 0), 20.0);
  EXPECT_EQ(ds.aeronet(0), 0.4);
  EXPECT_EQ(ds.baseline(1), 0.6);
  std::filesystem::remove(path);
}

TEST(LoadCsv, DropsMalformedRowsAndCountsThem) {
  const auto path = temp_path("malformed_rows.csv");
  glrr::atomic_write_text(path,
                          "id,band_1,aeronet_aod,baseline_aod\n"
                          "a,1,0.5,0.4\n"
                          "b,oops,0.5,0.4\n"      // non-numeric band
                          "c,2,nan,0.4\n"         // non-finite target
                          "d,3,0.5\n"             // short row
                          ",4,0.5,0.4\n"          // empty id
                          "e,5,0.5,0.4\n");
  const RetrievalDataset ds = glrr::load_csv(path);
  EXPECT_EQ(ds.n(), 2);
  EXPECT_EQ(ds.dropped_rows, 4);
  EXPECT_EQ(ds.ids, (std::vector<std::string>{"a", "e"}));
  std::filesystem::remove(path);
}

TEST(LoadCsv, MissingRequiredColumnNamesItInTheError) {
  const auto path = temp_path("missing_column.csv");
  glrr::atomic_write_text(path,
                          "id,band_1,baseline_aod\n"
                          "a,1,0.4\n"
                          "b,2,0.5\n");
  try {
    glrr::load_csv(path);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("aeronet_aod"), std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST(LoadCsv, BandNumberingMustBeContiguousFromOne) {
  const auto path = temp_path("band_gap.csv");
  glrr::atomic_write_text(path,
                          "id,band_1,band_3,aeronet_aod,baseline_aod\n"
                          "a,1,3,0.5,0.4\n"
                          "b,2,4,0.5,0.4\n");
  try {
    glrr::load_csv(path);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("band_3"), std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST(LoadCsv, RejectsFilesWithoutEnoughUsableRows) {
  const auto header_only = temp_path("header_only.csv");
  glrr::atomic_write_text(header_only,
                          "id,band_1,aeronet_aod,baseline_aod\n"
                          "a,junk,0.5,0.4\n"
                          "b,junk,0.5,0.4\n");
  EXPECT_THROW(glrr::load_csv(header_only), InvalidInput);
  const auto empty = temp_path("empty.csv");
  glrr::atomic_write_text(empty, "# nothing here\n");
  EXPECT_THROW(glrr::load_csv(empty), SchemaError);
  std::filesystem::remove(header_only);
  std::filesystem::remove(empty);
}

TEST(SaveCsv, RoundTripReproducesEveryValueExactly) {
  RetrievalDataset ds;
  ds.spectra = Matrix(3, 4);
  ds.spectra << 0.1, 1.0 / 3.0, 1e-300, -12345.678901234567,
      2.5e300, -0.0, 7.0, 1e-7,
      0.3, 0.7, -1.25, 42.0;
  ds.aeronet = Vector(4);
  ds.aeronet << 0.25, 1.0 / 7.0, -3.5, 0.125;
  ds.baseline = Vector(4);
  ds.baseline << 0.5, 0.25, -3.25, 0.0625;
  ds.ids = {"a", "b", "c", "d"};

  const auto path = temp_path("round_trip.csv");
  glrr::save_csv(ds, path, {"written by the round-trip test"});
  const RetrievalDataset back = glrr::load_csv(path);
  ASSERT_EQ(back.n(), 4);
  ASSERT_EQ(back.d(), 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j)
      EXPECT_TRUE(same_bits(back.spectra(i, j), ds.spectra(i, j)))
          << i << "," << j;
  for (int j = 0; j < 4; ++j) {
    EXPECT_TRUE(same_bits(back.aeronet(j), ds.aeronet(j)));
    EXPECT_TRUE(same_bits(back.baseline(j), ds.baseline(j)));
  }
  EXPECT_EQ(back.ids, ds.ids);
  EXPECT_EQ(back.dropped_rows, 0);
  std::filesystem::remove(path);
}

TEST(Synthetic, SameSeedIsBitIdentical) {
  SyntheticSpec spec;
  spec.n = 40;
  spec.d = 8;
  spec.r = 3;
  spec.seed = 99;
  const auto a = glrr::generate_synthetic(spec);
  const auto b = glrr::generate_synthetic(spec);
  EXPECT_TRUE(a.dataset.spectra == b.dataset.spectra);
  EXPECT_TRUE(a.dataset.aeronet == b.dataset.aeronet);
  EXPECT_TRUE(a.dataset.baseline == b.dataset.baseline);
  EXPECT_EQ(a.dataset.ids, b.dataset.ids);
  EXPECT_EQ(a.corrupted_columns, b.corrupted_columns);
  EXPECT_TRUE(a.clean == b.clean);

  SyntheticSpec other = spec;
  other.seed = 100;
  const auto c = glrr::generate_synthetic(other);
  EXPECT_FALSE(a.dataset.spectra == c.dataset.spectra);
}

TEST(Synthetic, UncorruptedDataHasExactNumericalRank) {
  SyntheticSpec spec;
  spec.n = 60;
  spec.d = 12;
  spec.r = 3;
  spec.corrupt_fraction = 0.0;
  spec.seed = 5;
  const auto data = glrr::generate_synthetic(spec);
  const Eigen::BDCSVD<Matrix> svd(data.dataset.spectra);
  const auto& sv = svd.singularValues();
  EXPECT_GT(sv(2), 1e-10 * sv(0));
  EXPECT_LT(sv(3), 1e-10 * sv(0));
}

TEST(Synthetic, BandWarpDestroysExactLowRank) {
  SyntheticSpec spec;
  spec.n = 60;
  spec.d = 12;
  spec.r = 3;
  spec.corrupt_fraction = 0.0;
  spec.nonlinear_warp = true;
  spec.seed = 5;
  const auto data = glrr::generate_synthetic(spec);
  const Eigen::BDCSVD<Matrix> svd(data.dataset.spectra);
  const auto& sv = svd.singularValues();
  EXPECT_GT(sv(3), 1e-8 * sv(0));
}

TEST(Synthetic, PlantedSetHasExactlyRoundedSize) {
  SyntheticSpec spec;
  spec.d = 4;
  spec.r = 2;
  spec.seed = 11;

  spec.n = 30;
  spec.corrupt_fraction = 0.1;
  EXPECT_EQ(glrr::generate_synthetic(spec).corrupted_columns.size(), 3u);

  spec.n = 10;
  spec.corrupt_fraction = 0.25;  // 2.5 rounds away from zero
  EXPECT_EQ(glrr::generate_synthetic(spec).corrupted_columns.size(), 3u);

  spec.n = 200;
  spec.corrupt_fraction = 0.1;
  const auto data = glrr::generate_synthetic(spec);
  ASSERT_EQ(data.corrupted_columns.size(), 20u);
  for (size_t i = 0; i < data.corrupted_columns.size(); ++i) {
    EXPECT_GE(data.corrupted_columns[i], 0);
    EXPECT_LT(data.corrupted_columns[i], spec.n);
    if (i) EXPECT_LT(data.corrupted_columns[i - 1], data.corrupted_columns[i]);
  }
}

TEST(Synthetic, CorruptionTouchesOnlyPlantedColumnsAndNeverTargets) {
  SyntheticSpec clean_spec;
  clean_spec.n = 50;
  clean_spec.d = 6;
  clean_spec.r = 2;
  clean_spec.corrupt_fraction = 0.0;
  clean_spec.seed = 21;
  SyntheticSpec noisy_spec = clean_spec;
  noisy_spec.corrupt_fraction = 0.2;

  const auto clean = glrr::generate_synthetic(clean_spec);
  const auto noisy = glrr::generate_synthetic(noisy_spec);
  EXPECT_TRUE(clean.dataset.aeronet == noisy.dataset.aeronet);
  EXPECT_TRUE(clean.dataset.baseline == noisy.dataset.baseline);
  EXPECT_TRUE(noisy.clean == clean.dataset.spectra);
  ASSERT_EQ(noisy.corrupted_columns.size(), 10u);
  for (int j = 0; j < noisy_spec.n; ++j) {
    const bool planted =
        std::find(noisy.corrupted_columns.begin(),
                  noisy.corrupted_columns.end(),
                  j) != noisy.corrupted_columns.end();
    const bool same =
        noisy.dataset.spectra.col(j) == clean.dataset.spectra.col(j);
    EXPECT_EQ(same, !planted) << "column " << j;
  }
}

TEST(Synthetic, ZeroBaselineNoiseEchoesTargetsExactly) {
  SyntheticSpec spec;
  spec.n = 25;
  spec.d = 5;
  spec.r = 2;
  spec.baseline_noise = 0.0;
  spec.seed = 3;
  const auto data = glrr::generate_synthetic(spec);
  EXPECT_TRUE(data.dataset.baseline == data.dataset.aeronet);
}

TEST(Synthetic, SmoothNonlinearTargetsDifferFromLinearOnes) {
  SyntheticSpec spec;
  spec.n = 25;
  spec.d = 5;
  spec.r = 2;
  spec.seed = 3;
  const auto linear = glrr::generate_synthetic(spec);
  spec.target_map = "smooth-nonlinear";
  const auto smooth = glrr::generate_synthetic(spec);
  EXPECT_TRUE(linear.dataset.spectra == smooth.dataset.spectra);
  EXPECT_FALSE(linear.dataset.aeronet == smooth.dataset.aeronet);
  for (int j = 0; j < spec.n; ++j) {
    EXPECT_TRUE(std::isfinite(smooth.dataset.aeronet(j)));
    EXPECT_GT(smooth.dataset.aeronet(j), 0.0);  // softplus output is positive
  }
}

TEST(Synthetic, RejectsInvalidSpecs) {
  SyntheticSpec spec;
  spec.n = 10;
  spec.d = 4;
  spec.r = 5;  // r > min(d, n)
  EXPECT_THROW(glrr::generate_synthetic(spec), InvalidInput);
  spec.r = 2;
  spec.corrupt_fraction = 1.0;
  EXPECT_THROW(glrr::generate_synthetic(spec), InvalidInput);
  spec.corrupt_fraction = 0.1;
  spec.target_map = "cubic";
  EXPECT_THROW(glrr::generate_synthetic(spec), InvalidInput);
  spec.target_map = "linear";
  spec.noise_scale = -1.0;
  EXPECT_THROW(glrr::generate_synthetic(spec), InvalidInput);
}

TEST(ConfigFile, ParsesSectionsListsAndComments) {
  const std::string text =
      "# experiment setup\n"
      "[solver]\n"
      "lambda = 10\n"
      "max_iter = 250\n"
      "\n"
      "[graph]\n"
      "k = 7\n"
      "sigma = 0.5\n"
      "[experiment]\n"
      "train_percentages = 0.25, 0.5 ,0.75\n"
      "methods = svr, glrr_svr\n"
      "repeats = 3\n"
      "seed = 123\n"
      "gamma_grid = 0.01,0.1,1\n"
      "[synthetic]\n"
      "nonlinear_warp = true\n"
      "target_map = smooth-nonlinear\n"
      "n = 80\n";
  const Config config = glrr::parse_config(text);
  EXPECT_EQ(config.experiment.glrr.lambda, 10.0);
  EXPECT_EQ(config.experiment.glrr.max_iter, 250);
  EXPECT_EQ(config.experiment.glrr.rho, 1.1);  // untouched default
  EXPECT_EQ(config.experiment.graph.k, 7);
  EXPECT_EQ(config.experiment.graph.sigma, 0.5);
  EXPECT_EQ(config.experiment.train_percentages,
            (std::vector<double>{0.25, 0.5, 0.75}));
  EXPECT_EQ(config.experiment.methods,
            (std::vector<std::string>{"svr", "glrr_svr"}));
  EXPECT_EQ(config.experiment.repeats, 3);
  EXPECT_EQ(config.experiment.seed, 123u);
  EXPECT_EQ(config.experiment.gamma_grid,
            (std::vector<double>{0.01, 0.1, 1.0}));
  EXPECT_TRUE(config.synthetic.nonlinear_warp);
  EXPECT_EQ(config.synthetic.target_map, "smooth-nonlinear");
  EXPECT_EQ(config.synthetic.n, 80);
  EXPECT_EQ(config.synthetic.d, 16);  // untouched default
}

TEST(ConfigFile, EmittedConfigParsesBackIdentically) {
  Config config;
  config.experiment.glrr.lambda = 0.1;
  config.experiment.glrr.eps = 1e-8;
  config.experiment.train_percentages = {0.3, 0.6};
  config.experiment.methods = {"ols", "lrr_svr"};
  config.experiment.seed = 987654321;
  config.experiment.alpha_grid = {0.5, 5.0};
  config.synthetic.nonlinear_warp = true;
  config.synthetic.corrupt_fraction = 0.05;
  config.synthetic.seed = 44;

  const Config back = glrr::parse_config(glrr::config_text(config));
  EXPECT_EQ(back.experiment.glrr.lambda, config.experiment.glrr.lambda);
  EXPECT_EQ(back.experiment.glrr.eps, config.experiment.glrr.eps);
  EXPECT_EQ(back.experiment.glrr.mu_max, config.experiment.glrr.mu_max);
  EXPECT_EQ(back.experiment.train_percentages,
            config.experiment.train_percentages);
  EXPECT_EQ(back.experiment.methods, config.experiment.methods);
  EXPECT_EQ(back.experiment.seed, config.experiment.seed);
  EXPECT_EQ(back.experiment.lambda_grid, config.experiment.lambda_grid);
  EXPECT_EQ(back.experiment.alpha_grid, config.experiment.alpha_grid);
  EXPECT_EQ(back.experiment.epsilon_tube, config.experiment.epsilon_tube);
  EXPECT_EQ(back.experiment.cv_folds, config.experiment.cv_folds);
  EXPECT_EQ(back.synthetic.nonlinear_warp, config.synthetic.nonlinear_warp);
  EXPECT_EQ(back.synthetic.corrupt_fraction,
            config.synthetic.corrupt_fraction);
  EXPECT_EQ(back.synthetic.seed, config.synthetic.seed);
  EXPECT_EQ(back.synthetic.target_map, config.synthetic.target_map);
}

TEST(ConfigFile, RejectsUnknownSectionsAndKeys) {
  EXPECT_THROW(glrr::parse_config("[rocket]\nthrust = 9\n"), SchemaError);
  try {
    glrr::parse_config("[solver]\nlambada = 1\n");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("lambada"), std::string::npos);
  }
  EXPECT_THROW(glrr::parse_config("stray = 1\n"), SchemaError);
  EXPECT_THROW(glrr::parse_config("[solver]\nno equals sign\n"), SchemaError);
  EXPECT_THROW(glrr::parse_config("[solver\nlambda = 1\n"), SchemaError);
  EXPECT_THROW(glrr::parse_config("[solver]\nlambda = banana\n"),
               InvalidInput);
  EXPECT_THROW(glrr::parse_config("[solver]\nmax_iter = 1.5\n"),
               InvalidInput);
  EXPECT_THROW(glrr::parse_config("[synthetic]\nnonlinear_warp = maybe\n"),
               InvalidInput);
}

TEST(ConfigFile, LoadsFromDiskWithLineNumbersInErrors) {
  const auto path = temp_path("bad.conf");
  glrr::atomic_write_text(path, "[solver]\nlambda = 1\nbogus_key = 2\n");
  try {
    glrr::load_config(path);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("bogus_key"), std::string::npos);
    EXPECT_NE(what.find(":3"), std::string::npos);
  }
  std::filesystem::remove(path);
}

}  // namespace
