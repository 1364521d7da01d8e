#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "makeup/makeup.hpp"
#include "oracles.hpp"

using namespace makeup;
namespace fs = std::filesystem;

namespace {

fs::path data_dir() { return MAKEUP_TEST_DATA_DIR; }

fs::path write_temp(const std::string& name, const std::string& text) {
  const auto p = fs::temp_directory_path() / ("makeup_align_" + name);
  std::ofstream(p) << text;
  return p;
}

landmark_set face_landmarks(int w, int h) { return synth::render(synth::plain_subject(), w, h).landmarks; }

raster_image checkerboard(int w, int h, int cell) {
  raster_image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const bool on = ((x / cell) + (y / cell)) % 2 == 0;
      img(x, y) = on ? rgb8{240, 30, 30} : rgb8{20, 20, 200};
    }
  return img;
}

/// Index of the mesh triangle containing p, first in mesh order.
int owning_triangle(const triangle_mesh& m, point2 p) {
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tr = m.triangles[t];
    const auto l = geom::barycentric(m.vertices[tr[0]], m.vertices[tr[1]], m.vertices[tr[2]], p);
    if (l[0] >= -1e-9 && l[1] >= -1e-9 && l[2] >= -1e-9) return static_cast<int>(t);
  }
  return -1;
}

}  // namespace

TEST(LoadLandmarks, FixtureFile) {
  const auto img = io::load_rgb(data_dir() / "subject.png");
  const auto lm = load_landmarks(data_dir() / "subject.landmarks", img);
  EXPECT_EQ(lm.size(), 90u);
}

TEST(LoadLandmarks, WrongCount) {
  std::string text = R"({"points": [)";
  for (int i = 0; i < 89; ++i) text += (i ? "," : "") + std::string("[10, 10]");
  text += "]}";
  try {
    load_landmarks(write_temp("89.landmarks", text), 64, 64);
    FAIL() << "expected a count error";
  } catch (const landmark_count_error& e) {
    EXPECT_EQ(e.found(), 89u);
  }
}

TEST(LoadLandmarks, OutOfBounds) {
  auto pts = face_landmarks(64, 64).points();
  pts[3] = {-3, 10};
  EXPECT_THROW(landmark_set::validated(pts, 64, 64), landmark_bounds_error);
  const auto path = write_temp("oob.landmarks", landmarks_to_json(face_landmarks(64, 64)));
  EXPECT_THROW(load_landmarks(path, 20, 20), landmark_bounds_error);
}

TEST(LoadLandmarks, Malformed) {
  EXPECT_THROW(load_landmarks(write_temp("bad1.landmarks", "{not json"), 64, 64), parse_error);
  EXPECT_THROW(load_landmarks(write_temp("bad2.landmarks", R"({"pts": []})"), 64, 64), parse_error);
  EXPECT_THROW(load_landmarks(write_temp("bad3.landmarks", R"({"points": [[1, "a"]]})"), 64, 64), parse_error);
  EXPECT_THROW(load_landmarks(fs::path("/nonexistent/x.landmarks"), 64, 64), io_error);
}

TEST(LoadLandmarks, JsonRoundTrip) {
  const auto lm = face_landmarks(100, 90);
  EXPECT_EQ(parse_landmarks(landmarks_to_json(lm), 100, 90), lm);
}

TEST(BuildMesh, EulerCountAndCoverage) {
  const int w = 96, h = 80;
  const auto mesh = build_mesh(face_landmarks(w, h), w, h);
  ASSERT_EQ(mesh.vertices.size(), 98u);
  int on_frame = 0;
  for (const auto& v : mesh.vertices)
    if (v.x == 0 || v.y == 0 || v.x == w - 1 || v.y == h - 1) ++on_frame;
  EXPECT_EQ(on_frame, 8);
  EXPECT_EQ(static_cast<int>(mesh.triangles.size()), 2 * 98 - 2 - on_frame);
  EXPECT_EQ(mesh.triangles.size(), 186u);

  double area = 0;
  for (const auto& t : mesh.triangles) {
    const double a = geom::area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    EXPECT_GT(a, 1e-9);
    area += a;
  }
  EXPECT_NEAR(area, double(w - 1) * (h - 1), 1e-6);
}

TEST(BuildMesh, EmptyCircumcircles) {
  const int w = 96, h = 80;
  const auto mesh = build_mesh(face_landmarks(w, h), w, h);
  const auto& v = mesh.vertices;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < static_cast<int>(v.size()); ++k) {
      if (k == t[0] || k == t[1] || k == t[2]) continue;
      // Relative tolerance: the frame corners are co-circular by construction.
      EXPECT_LE(geom::incircle(v[t[0]], v[t[1]], v[t[2]], v[k]), 1e-6 * w * w * w * w)
          << "vertex " << k << " inside circumcircle";
      const auto l = geom::barycentric(v[t[0]], v[t[1]], v[t[2]], v[k]);
      EXPECT_FALSE(l[0] > 1e-9 && l[1] > 1e-9 && l[2] > 1e-9) << "vertex " << k << " inside a triangle";
    }
}

TEST(BuildMesh, DuplicateLandmarkIsDegenerate) {
  auto pts = face_landmarks(64, 64).points();
  pts[10] = pts[11];
  EXPECT_THROW(build_mesh(landmark_set::validated(pts, 64, 64), 64, 64), degeneracy_error);
  pts = face_landmarks(64, 64).points();
  pts[5] = {0, 0};  // on a frame anchor
  EXPECT_THROW(build_mesh(landmark_set::validated(pts, 64, 64), 64, 64), degeneracy_error);
}

TEST(BuildMesh, Deterministic) {
  const auto lm = face_landmarks(70, 70);
  EXPECT_EQ(build_mesh(lm, 70, 70), build_mesh(lm, 70, 70));
}

TEST(BuildMesh, LandmarkOnFrameEdge) {
  auto pts = face_landmarks(64, 64).points();
  pts[0] = {0, 20.5};
  const auto mesh = build_mesh(landmark_set::validated(pts, 64, 64), 64, 64);
  EXPECT_EQ(static_cast<int>(mesh.triangles.size()), 2 * 98 - 2 - 9);
}

TEST(WarpImage, IdentityLandmarks) {
  const auto face = synth::render(synth::plain_subject(), 64, 64);
  const auto out = warp_image(face.image, face.landmarks, face.landmarks, 64, 64);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_LE(std::abs(out[i].r - face.image[i].r), 1);
    EXPECT_LE(std::abs(out[i].g - face.image[i].g), 1);
    EXPECT_LE(std::abs(out[i].b - face.image[i].b), 1);
  }
}

TEST(WarpImage, TranslationOnEnlargedCanvas) {
  const int w = 80, h = 80;
  const auto face = synth::render(synth::plain_subject(), w, h);
  const auto dst_lm = face.landmarks.translated(5, 0, w + 10, h);
  const auto out = warp_image(face.image, face.landmarks, dst_lm, w + 10, h);
  const auto mesh = build_mesh(dst_lm, w + 10, h);
  int checked = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w + 10; ++x) {
      const int t = owning_triangle(mesh, {double(x), double(y)});
      ASSERT_GE(t, 0);
      const auto& tr = mesh.triangles[t];
      if (tr[0] >= 90 || tr[1] >= 90 || tr[2] >= 90) continue;  // touches a frame anchor
      const rgb8 a = out(x, y), b = face.image(x - 5, y);
      EXPECT_LE(std::abs(a.r - b.r), 1);
      EXPECT_LE(std::abs(a.g - b.g), 1);
      EXPECT_LE(std::abs(a.b - b.b), 1);
      ++checked;
    }
  EXPECT_GT(checked, 1000);
}

TEST(WarpImage, MovingOneLandmarkIsLocal) {
  const int w = 72, h = 72;
  const auto lm = face_landmarks(w, h);
  const auto board = checkerboard(w, h, 4);
  const std::size_t k = 42;
  auto pts = lm.points();
  pts[k].x += 2.0;
  pts[k].y += 1.0;
  const auto moved = landmark_set::validated(pts, w, h);

  const auto base = warp_image(board, lm, lm, w, h);
  const auto out = warp_image(board, moved, lm, w, h);
  const auto mesh = build_mesh(lm, w, h);
  const auto src_vertices = mesh_vertices(moved, w, h);
  int changed_far = 0, changed_near = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int t = owning_triangle(mesh, {double(x), double(y)});
      const auto& tr = mesh.triangles[t];
      const bool adjacent = tr[0] == int(k) || tr[1] == int(k) || tr[2] == int(k);
      if (!adjacent && !(out(x, y) == base(x, y))) ++changed_far;
      if (adjacent && !(out(x, y) == base(x, y))) ++changed_near;
      // Direct per-triangle evaluation.
      const auto l = geom::barycentric(mesh.vertices[tr[0]], mesh.vertices[tr[1]], mesh.vertices[tr[2]],
                                       {double(x), double(y)});
      double sx = 0, sy = 0;
      for (int j = 0; j < 3; ++j) {
        sx += l[j] * src_vertices[tr[j]].x;
        sy += l[j] * src_vertices[tr[j]].y;
      }
      const rgb8 expect = sample_bilinear(board, sx, sy);
      EXPECT_LE(std::abs(out(x, y).r - expect.r), 1);
      EXPECT_LE(std::abs(out(x, y).b - expect.b), 1);
    }
  EXPECT_EQ(changed_far, 0);
  EXPECT_GT(changed_near, 0);
}

TEST(WarpLabels, IdentityAndClosure) {
  const auto face = synth::render(synth::plain_subject(), 64, 64);
  EXPECT_EQ(warp_labels(face.labels, face.landmarks, face.landmarks, 64, 64), face.labels);

  const auto ref = synth::render(synth::made_up_reference(), 80, 70);
  const auto warped = warp_labels(ref.labels, ref.landmarks, face.landmarks, 64, 64);
  std::set<int> present, seen;
  for (std::size_t i = 0; i < ref.labels.size(); ++i) present.insert(int(ref.labels[i]));
  for (std::size_t i = 0; i < warped.size(); ++i) seen.insert(int(warped[i]));
  for (int v : seen) EXPECT_TRUE(present.count(v)) << "invented label " << v;
}

TEST(WarpLabels, TranslationMatchesImageGeometry) {
  const int w = 80, h = 80;
  const auto face = synth::render(synth::plain_subject(), w, h);
  const auto dst_lm = face.landmarks.translated(5, 0, w + 10, h);
  const auto out = warp_labels(face.labels, face.landmarks, dst_lm, w + 10, h);
  const auto mesh = build_mesh(dst_lm, w + 10, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w + 10; ++x) {
      const auto& tr = mesh.triangles[owning_triangle(mesh, {double(x), double(y)})];
      if (tr[0] >= 90 || tr[1] >= 90 || tr[2] >= 90) continue;
      EXPECT_EQ(out(x, y), face.labels(x - 5, y));
    }
}

TEST(WarpImage, Deterministic) {
  const auto a = synth::render(synth::plain_subject(), 60, 60);
  const auto b = synth::render(synth::made_up_reference(), 60, 60);
  EXPECT_EQ(warp_image(b.image, b.landmarks, a.landmarks, 60, 60),
            warp_image(b.image, b.landmarks, a.landmarks, 60, 60));
}

TEST(WarpField, LandmarkFidelityWithCoordinateImage) {
  const int w = 224, h = 224;
  const auto src_lm = face_landmarks(w, h);
  scalar_field X(w, h), Y(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      X(x, y) = x;
      Y(x, y) = y;
    }
  std::mt19937 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto dst_lm = oracle::perturbed(src_lm, rng, w, h);
    const auto wx = warp_field(X, src_lm, dst_lm, w, h);
    const auto wy = warp_field(Y, src_lm, dst_lm, w, h);
    for (std::size_t k = 0; k < landmark_count; ++k) {
      const double sx = sample_bilinear(wx, dst_lm[k].x, dst_lm[k].y);
      const double sy = sample_bilinear(wy, dst_lm[k].x, dst_lm[k].y);
      EXPECT_LE(std::hypot(sx - src_lm[k].x, sy - src_lm[k].y), 0.5) << "trial " << trial << " landmark " << k;
    }
  }
}

TEST(WarpCoordinates, ExactAtPixelCenterLandmarks) {
  // A destination landmark on a pixel center maps to its source landmark exactly.
  const int w = 100, h = 100;
  const auto src_lm = face_landmarks(w, h);
  auto pts = src_lm.points();
  pts[30] = {std::round(pts[30].x) + 1, std::round(pts[30].y)};
  const auto dst_lm = landmark_set::validated(pts, w, h);
  const auto map = warp_coordinates(src_lm, w, h, dst_lm, w, h);
  const auto m = map(static_cast<int>(pts[30].x), static_cast<int>(pts[30].y));
  EXPECT_NEAR(m.x, src_lm[30].x, 1e-9);
  EXPECT_NEAR(m.y, src_lm[30].y, 1e-9);
}
