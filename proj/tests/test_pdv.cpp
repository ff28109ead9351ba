#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lp2dh/pdv.hpp"
#include "lp2dh/rng.hpp"
#include "lp2dh/volume_io.hpp"

using namespace lp2dh;

namespace {

VideoVolume random_volume(int t, int h, int w, uint64_t seed) {
  VideoVolume vol;
  vol.frames = t;
  vol.rows = h;
  vol.cols = w;
  vol.data.resize(static_cast<size_t>(t) * h * w);
  Rng rng(seed);
  for (double& v : vol.data) v = 255.0 * rng.uniform01();
  return vol;
}

}  // namespace

TEST_CASE("dimension follows P^3 - 1") {
  CHECK(neighbor_offsets(3).size() == 26);
  CHECK(neighbor_offsets(5).size() == 124);
  const VideoVolume vol = random_volume(6, 6, 6, 1);
  CHECK(extract_pdvs(vol, 3).dim() == 26);
  CHECK(extract_pdvs(vol, 5).dim() == 124);
  CHECK_THROWS_AS(neighbor_offsets(4), std::invalid_argument);
  CHECK_THROWS_AS(neighbor_offsets(1), std::invalid_argument);
}

TEST_CASE("offsets are in raster order") {
  const auto off = neighbor_offsets(3);
  CHECK(off.front() == std::array<int, 3>{-1, -1, -1});
  CHECK(off.back() == std::array<int, 3>{1, 1, 1});
  // strictly increasing in (dt, dy, dx) lexicographic order
  for (size_t i = 1; i < off.size(); ++i) {
    CHECK(off[i - 1] < off[i]);
  }
  // center excluded
  for (const auto& o : off) {
    CHECK((o[0] != 0 || o[1] != 0 || o[2] != 0));
  }
}

TEST_CASE("constant volume gives all-zero PDVs") {
  VideoVolume vol;
  vol.frames = vol.rows = vol.cols = 4;
  vol.data.assign(64, 42.0);
  const PdvMatrix X = extract_pdvs(vol, 3);
  CHECK(X.count() == 8);
  CHECK(X.columns.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("center 5 with 26 neighbours of 7 gives twenty-six 2s") {
  VideoVolume vol;
  vol.frames = vol.rows = vol.cols = 3;
  vol.data.assign(27, 7.0);
  vol.at(1, 1, 1) = 5.0;
  const PdvMatrix X = extract_pdvs(vol, 3);
  REQUIRE(X.count() == 1);
  REQUIRE(X.dim() == 26);
  for (int d = 0; d < 26; ++d) CHECK(X.columns(d, 0) == 2.0);
}

TEST_CASE("center count formula for stride (1,1,1)") {
  Rng rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    const int t = 3 + static_cast<int>(rng.bounded(6));
    const int h = 3 + static_cast<int>(rng.bounded(6));
    const int w = 3 + static_cast<int>(rng.bounded(6));
    const VideoVolume vol = random_volume(t, h, w, 100 + rep);
    const PdvMatrix X = extract_pdvs(vol, 3);
    CHECK(X.count() == static_cast<int64_t>(t - 2) * (h - 2) * (w - 2));
  }
}

TEST_CASE("stride subsamples the center grid") {
  const VideoVolume vol = random_volume(7, 7, 7, 3);
  const PdvMatrix X = extract_pdvs(vol, 3, Stride{2, 2, 2});
  // centers at t,y,x in {1,3,5}
  CHECK(X.count() == 27);
  CHECK_THROWS_AS(extract_pdvs(vol, 3, Stride{0, 1, 1}), std::invalid_argument);
}

TEST_CASE("illumination offset invariance") {
  VideoVolume vol = random_volume(5, 6, 7, 11);
  const PdvMatrix a = extract_pdvs(vol, 3);
  for (double& v : vol.data) v += 13.25;
  const PdvMatrix b = extract_pdvs(vol, 3);
  CHECK(a.columns == b.columns);
}

TEST_CASE("seeded subsampling is reproducible and capped") {
  const VideoVolume vol = random_volume(8, 8, 8, 5);
  const PdvMatrix a = extract_pdvs(vol, 3, Stride{}, 50, 9);
  const PdvMatrix b = extract_pdvs(vol, 3, Stride{}, 50, 9);
  const PdvMatrix c = extract_pdvs(vol, 3, Stride{}, 50, 10);
  CHECK(a.count() == 50);
  CHECK(a.columns == b.columns);
  CHECK(c.count() == 50);
  CHECK(a.columns != c.columns);
  // cap above the center count keeps everything
  const PdvMatrix d = extract_pdvs(vol, 3, Stride{}, 10000, 9);
  CHECK(d.count() == 216);
}

TEST_CASE("volume smaller than P is rejected") {
  const VideoVolume vol = random_volume(3, 3, 4, 2);
  CHECK_THROWS_WITH_AS(extract_pdvs(vol, 5), doctest::Contains("smaller"),
                       std::runtime_error);
}
