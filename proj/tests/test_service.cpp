#include <gtest/gtest.h>

#include <thread>

#include "fixtures.hpp"
#include "makeup/service.hpp"

using namespace makeup;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  const auto b = io::read_file(p);
  return {b.begin(), b.end()};
}

httplib::MultipartFormData file_part(const std::string& name, const fs::path& p) {
  return {name, slurp(p), p.filename().string(), "application/octet-stream"};
}

httplib::MultipartFormDataItems face_parts(const std::string& prefix, const face_files& f) {
  return {file_part(prefix, f.image), file_part(prefix + "_landmarks", f.landmarks),
          file_part(prefix + "_labels", f.labels)};
}

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    service_ = std::make_unique<service::studio_service>(fixture::data_dir());
    server_ = std::make_unique<httplib::Server>();
    server_->set_payload_max_length(64u << 20);
    service_->mount(*server_);
    port_ = server_->bind_to_any_port("127.0.0.1");
    thread_ = std::thread([] { server_->listen_after_bind(); });
    server_->wait_until_ready();
  }

  static void TearDownTestSuite() {
    server_->stop();
    thread_.join();
    server_.reset();
    service_.reset();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30);
    return c;
  }

  static inline std::unique_ptr<service::studio_service> service_;
  static inline std::unique_ptr<httplib::Server> server_;
  static inline std::thread thread_;
  static inline int port_ = 0;
};

}  // namespace

TEST_F(ServiceTest, Health) {
  auto res = client().Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(nlohmann::json::parse(res->body)["status"], "ok");
}

TEST_F(ServiceTest, GalleryListing) {
  auto res = client().Get("/references");
  ASSERT_TRUE(res);
  const auto j = nlohmann::json::parse(res->body);
  ASSERT_EQ(j["references"].size(), 1u);
  EXPECT_EQ(j["references"][0]["id"], "synthetic-red-lips");
  EXPECT_TRUE(j["references"][0]["has_labels"].get<bool>());
  auto thumb = client().Get("/references/synthetic-red-lips/thumbnail");
  ASSERT_TRUE(thumb);
  EXPECT_EQ(thumb->status, 200);
  const auto img = io::decode_rgb(service::detail::as_bytes(thumb->body));
  EXPECT_EQ(std::max(img.width(), img.height()), 128);
  EXPECT_EQ(client().Get("/references/nope/thumbnail")->status, 404);
}

TEST_F(ServiceTest, TransferMatchesCliBytes) {
  const auto dir = fixture::scratch_dir("service_parity");
  run_pipeline(fixture::pair_config(dir / "cli.png"));
  const auto expected = slurp(dir / "cli.png");

  auto items = face_parts("input", fixture::face("subject"));
  items.push_back({"reference_id", "synthetic-red-lips", "", ""});
  items.push_back({"alpha", "0.95", "", ""});
  items.push_back({"beta", "30", "", ""});
  auto res = client().Post("/transfer", items);
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_EQ(res->body, expected);
  EXPECT_EQ(res->get_header_value("X-Output-Checksum"), service::checksum_hex(service::detail::as_bytes(expected)));
  EXPECT_NE(res->get_header_value("Server-Timing").find("decompose;dur="), std::string::npos);
  EXPECT_FALSE(res->get_header_value("X-Total-Ms").empty());

  // Uploading the reference triple gives the same image.
  auto uploaded = face_parts("input", fixture::face("subject"));
  for (auto& p : face_parts("reference", fixture::face("reference"))) uploaded.push_back(p);
  auto res2 = client().Post("/transfer", uploaded);
  ASSERT_TRUE(res2);
  EXPECT_EQ(res2->body, expected);
}

TEST_F(ServiceTest, AlphaOutOfRangeIs400) {
  auto items = face_parts("input", fixture::face("subject"));
  items.push_back({"reference_id", "synthetic-red-lips", "", ""});
  items.push_back({"alpha", "2", "", ""});
  auto res = client().Post("/transfer", items);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(nlohmann::json::parse(res->body)["reason"], "out_of_range");
}

TEST_F(ServiceTest, MissingAndMalformedFields) {
  httplib::MultipartFormDataItems items{file_part("input", fixture::face("subject").image)};
  auto res = client().Post("/transfer", items);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  auto j = nlohmann::json::parse(res->body);
  EXPECT_EQ(j["reason"], "missing_field");
  EXPECT_EQ(j["field"], "input_landmarks");

  auto bad = face_parts("input", fixture::face("subject"));
  bad.push_back({"reference_id", "synthetic-red-lips", "", ""});
  bad.push_back({"beta", "thirty", "", ""});
  res = client().Post("/transfer", bad);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(nlohmann::json::parse(res->body)["reason"], "invalid_parameter");

  auto unknown = face_parts("input", fixture::face("subject"));
  unknown.push_back({"reference_id", "nobody", "", ""});
  res = client().Post("/transfer", unknown);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

TEST(Checksum, KnownVector) {
  // FNV-1a 64 of "a".
  const std::string a = "a";
  EXPECT_EQ(service::checksum_hex(service::detail::as_bytes(a)), "af63dc4c8601ec8c");
}
