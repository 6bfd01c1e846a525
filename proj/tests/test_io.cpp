#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "shapefit/io.hpp"
#include "shapefit/synth.hpp"

namespace shapefit {
namespace {

Instance parse(const std::string& text) {
  std::istringstream is(text);
  return read_instance(is);
}

TEST(InstanceFormat, RoundTripsExactly) {
  const Instance original = generate_instance({12, 3, 0.6, 0.3, 0.01, 99});
  const std::string text = to_text(original);
  const Instance back = parse(text);
  ASSERT_TRUE(back.locations.has_value());
  EXPECT_EQ(back.locations->matrix(), original.locations->matrix());
  EXPECT_EQ(back.observations.edges(), original.observations.edges());
  EXPECT_EQ(back.observations.directions(), original.observations.directions());
  EXPECT_EQ(back.observations.labels(), original.observations.labels());
  EXPECT_EQ(back.metadata, original.metadata);
  EXPECT_EQ(to_text(back), text);
}

TEST(InstanceFormat, FormatRealUsesSeventeenDigits) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_real(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(InstanceFormat, ObservationsOnlyAndComments) {
  const Instance inst = parse(
      "shapefit-v1 3 2 2\n"
      "# source=hand\n"
      "\n"
      "0 1 1 0\n"
      "# interleaved comment\n"
      "1 2 0 1\n");
  EXPECT_FALSE(inst.locations.has_value());
  EXPECT_FALSE(inst.observations.has_labels());
  EXPECT_EQ(inst.observations.edge_count(), 2);
  EXPECT_EQ(inst.metadata.at("source"), "hand");
}

TEST(InstanceFormat, LocationBlock) {
  std::ostringstream os;
  Matrix pts(2, 2);
  pts << 0.5, -0.5, 0, 0;
  write_locations(os, LocationSet(pts));
  const Instance inst = parse(os.str());
  ASSERT_TRUE(inst.locations.has_value());
  EXPECT_EQ(inst.locations->matrix(), pts);
  EXPECT_EQ(inst.observations.edge_count(), 0);
}

TEST(InstanceFormat, RejectsMalformedInput) {
  EXPECT_THROW(parse(""), InvalidInputError);
  EXPECT_THROW(parse("shapefit-v2 2 2 1\n0 1 1 0\n"), InvalidInputError);
  EXPECT_THROW(parse("shapefit-v1 2 2 2\n0 1 1 0\n"), InvalidInputError);
  EXPECT_THROW(parse("shapefit-v1 2 2 1\n0 1 1 x\n"), InvalidInputError);
  EXPECT_THROW(parse("shapefit-v1 3 2 2\n0 1 1 0 g\n1 2 0 1\n"), InvalidInputError);
  EXPECT_THROW(parse("shapefit-v1 2 2 1\n0 1 1 0 q\n"), InvalidInputError);
}

TEST(InstanceFormat, NonUnitDirectionNamesEdgeAndLine) {
  try {
    parse("shapefit-v1 3 2 2\n0 1 1 0\n1 2 0 0.5\n");
    FAIL() << "accepted a non-unit direction";
  } catch (const InvalidInputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(1, 2)"), std::string::npos) << msg;
  }
}

TEST(InstanceFormat, FileErrorsAreIoErrors) {
  EXPECT_THROW(load_instance("/nonexistent/dir/instance.txt"), IoError);
  const Instance inst = generate_instance({4, 2, 1.0, 0.0, 0.0, 1});
  EXPECT_THROW(save_instance("/nonexistent/dir/instance.txt", inst), IoError);

  const auto path = std::filesystem::temp_directory_path() / "shapefit_io_roundtrip.txt";
  save_instance(path, inst);
  EXPECT_EQ(to_text(load_instance(path)), to_text(inst));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace shapefit
