#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "tvws/io/csv.hpp"

using namespace tvws;

namespace {

CsvTable parse(const std::string& text) {
  std::istringstream in(text);
  return read_csv_table(in);
}

}  // namespace

TEST(Csv, HeaderCommentsAndBlankLines) {
  const auto t = parse("# recorded signal\nt,value\n\n0,1.5\n0.5,-2\n# tail\n1,3e-1\n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"t", "value"}));
  ASSERT_EQ(t.rows(), 3u);
  EXPECT_EQ(t.columns[1], (std::vector<double>{1.5, -2.0, 0.3}));
}

TEST(Csv, HeaderlessSingleColumnNeedsRate) {
  const auto t = parse("1\n2\n3\n");
  EXPECT_TRUE(t.header.empty());
  EXPECT_THROW(signal_from_table(t, std::nullopt), InvalidArgument);
  const auto x = signal_from_table(t, 250.0);
  EXPECT_EQ(x.fs, 250.0);
  EXPECT_EQ(x.size(), 3u);
}

TEST(Csv, RateFromTimeColumn) {
  const auto x = signal_from_table(parse("t,v\n1.0,0\n1.002,1\n1.004,0\n1.006,-1\n"), std::nullopt);
  EXPECT_NEAR(x.fs, 500.0, 1e-9);
  EXPECT_DOUBLE_EQ(x.t0, 1.0);
  EXPECT_NO_THROW(signal_from_table(parse("0,1\n0.5,2\n1,3\n"), 2.0));
  EXPECT_THROW(signal_from_table(parse("0,1\n0.5,2\n1,3\n"), 3.0), InvalidArgument);
}

TEST(Csv, RejectsMalformedInput) {
  EXPECT_THROW(parse("t,v\n0,1\n1,2,3\n"), IoError);
  EXPECT_THROW(parse("t,v\n0,abc\n"), IoError);
  EXPECT_THROW(parse("t,v\n"), IoError);
  EXPECT_THROW(signal_from_table(parse("0,1\n0.5,2\n1.7,3\n"), std::nullopt), IoError);
  EXPECT_THROW(signal_from_table(parse("0,1,2\n1,2,3\n"), std::nullopt), IoError);
  EXPECT_THROW(signal_from_table(parse("0,1\n1,nan\n"), std::nullopt), Error);
  EXPECT_THROW(read_csv_table("/nonexistent/input.csv"), IoError);
}

TEST(Csv, WriteReadRoundTripIsExact) {
  RealSignal x(std::vector<double>{0.1, -1.0 / 3.0, 2e-300, 12345.678901234567}, 2000.0, 0.25);
  const auto path = (std::filesystem::temp_directory_path() / "tvws_io_roundtrip.csv").string();
  write_signal_csv(path, x, "x");
  const auto y = read_signal_csv(path);
  EXPECT_EQ(y.samples, x.samples);
  EXPECT_NEAR(y.fs, x.fs, 1e-6);
  EXPECT_EQ(y.t0, x.t0);
  std::filesystem::remove(path);
  std::ostringstream os;
  EXPECT_THROW(write_csv_columns(os, {"a"}, {{1.0}, {2.0}}), InvalidArgument);
}
