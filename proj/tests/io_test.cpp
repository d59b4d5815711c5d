#include <latinbal/generate.hpp>
#include <latinbal/io.hpp>

#include <gtest/gtest.h>

using namespace latinbal;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvariantViolation;
}

}  // namespace

TEST(PermutationJson, RoundTripsRandomPermutations) {
  Rng rng(1);
  for (int n = 1; n <= 40; ++n) {
    io::PermutationDocument doc{random_permutation(n, rng), io::Json{{"note", "x"}}};
    const auto text = io::to_json(doc).dump();
    EXPECT_EQ(io::permutation_from_json(io::Json::parse(text)), doc);
  }
}

TEST(PermutationJson, RejectsBadDocuments) {
  EXPECT_EQ(code_of([] { io::permutation_from_json(io::Json::parse(R"({"format_version":1,"type":"permutation","n":3,"sigma":[0,0,1]})")); }),
            ErrorCode::NotABijection);
  EXPECT_EQ(code_of([] { io::permutation_from_json(io::Json::parse(R"({"format_version":1,"type":"permutation","n":4,"sigma":[0,2,1]})")); }),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([] { io::permutation_from_json(io::Json::parse(R"({"format_version":1,"type":"permutation","n":3})")); }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { io::permutation_from_json(io::Json::parse(R"({"format_version":1,"type":"latin_square","n":1,"cells":[[0]]})")); }),
            ErrorCode::ParseError);
}

TEST(SquareJson, RoundTripsRandomSquares) {
  Rng rng(2);
  for (int n = 1; n <= 15; ++n) {
    io::SquareDocument doc{random_latin_square(n, rng, n), io::Json::object()};
    const auto text = io::to_json(doc).dump(2);
    EXPECT_EQ(io::square_from_json(io::Json::parse(text)), doc);
    EXPECT_EQ(io::load_square(text), doc);
  }
}

TEST(SquareJson, InvalidSquareKeepsItsErrorCode) {
  const auto text = R"({"format_version":1,"type":"latin_square","n":2,"cells":[[0,1],[0,1]]})";
  EXPECT_EQ(code_of([&] { io::load_square(text); }), ErrorCode::ColumnViolation);
}

TEST(CertificateJson, RoundTripsAFoundCertificate) {
  AnnealConfig config;
  config.n = 13;
  config.seed = 4;
  auto cert = std::get<NearPPCertificate>(search(config));
  cert.elapsed_seconds = 0;
  const auto json = io::to_json(cert);
  EXPECT_FALSE(json["metadata"].contains("elapsed_seconds"));
  EXPECT_EQ(json["I_star"], "208/3");
  EXPECT_EQ(io::certificate_from_json(io::Json::parse(json.dump())), cert);
  EXPECT_TRUE(io::to_json(cert, true)["metadata"].contains("elapsed_seconds"));
}

TEST(CertificateJson, LenientClaimsKeepNonBijections) {
  const auto text = R"({"format_version":1,"type":"near_pp_certificate","n":4,"sigma":[0,0,1,2],"profile":[6,8,6],"imbalance3":16})";
  const auto claims = io::certificate_claims_from_json(io::Json::parse(text));
  EXPECT_EQ(claims.sigma, (std::vector<int>{0, 0, 1, 2}));
  EXPECT_EQ(code_of([&] { io::certificate_from_json(io::Json::parse(text)); }), ErrorCode::NotABijection);
}

TEST(Grid, ParsesWhitespaceAndComments) {
  const auto rows = io::parse_grid("# order 3\n0 1 2\n\n 1 2 0 \r\n2\t0 1\n");
  EXPECT_EQ(rows, (std::vector<std::vector<int>>{{0, 1, 2}, {1, 2, 0}, {2, 0, 1}}));
}

TEST(Grid, MalformedTokenIsAParseError) {
  EXPECT_EQ(code_of([] { io::parse_grid("0 1\n1 x\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { io::parse_grid("0 1.5\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { io::parse_grid("# nothing\n"); }), ErrorCode::ParseError);
}

TEST(Grid, FormatThenParseRoundTrips) {
  Rng rng(3);
  for (int n : {1, 5, 11, 12}) {
    const auto square = random_latin_square(n, rng, n);
    EXPECT_EQ(validate_latin(io::parse_grid(io::format_grid(square))), square);
  }
}

TEST(LoadDocument, DetectsEachKind) {
  EXPECT_EQ(io::load_document("0 1\n1 0\n").kind, io::DocumentKind::Grid);
  EXPECT_EQ(io::load_document("[[0,1],[1,0]]").kind, io::DocumentKind::Grid);
  EXPECT_EQ(io::load_document(R"({"sigma":[0,1,2]})").kind, io::DocumentKind::Permutation);
  EXPECT_EQ(io::load_document(R"({"cells":[[0]]})").kind, io::DocumentKind::Square);
  EXPECT_EQ(io::load_document(R"({"type":"near_pp_certificate"})").kind, io::DocumentKind::Certificate);
  EXPECT_EQ(code_of([] { io::load_document("{not json"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { io::load_document(R"({"type":"other"})"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { io::load_document("  \n"); }), ErrorCode::ParseError);
}

TEST(ManifestCsv, RoundTrips) {
  certify::TableManifest manifest;
  certify::TableRow ok;
  ok.n = 4;
  ok.ok = true;
  ok.i_star = "16/3";
  ok.seconds = 0.0125;
  certify::TableRow failed;
  failed.n = 7;
  failed.seconds = 2;
  manifest.rows = {ok, failed};
  const auto csv = io::manifest_csv(manifest);
  EXPECT_EQ(csv, "n,I_star,seconds\n4,16/3,0.013\n7,failed,2.000\n");
  const auto rows = io::parse_manifest_csv(csv);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (io::ManifestCsvRow{4, "16/3", 0.013}));
  EXPECT_EQ(rows[1].i_star, "failed");
  EXPECT_EQ(code_of([] { io::parse_manifest_csv("n,I\n"); }), ErrorCode::ParseError);
}
