#include <rklda/matrix_io.hpp>

#include <gtest/gtest.h>

#include <bit>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_support.hpp"

namespace rklda {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rklda_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

std::uint64_t read_u64_le(const std::string& bytes, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(bytes[at + static_cast<std::size_t>(b)]);
  return v;
}

TEST(Rkm1, LayoutIsMagicShapeThenRowMajorDoubles) {
  DenseMatrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6.5;
  const std::string bytes = io::encode_rkm1(m);
  ASSERT_EQ(bytes.size(), 4u + 16u + 6u * 8u);
  EXPECT_EQ(bytes.substr(0, 4), "RKM1");
  EXPECT_EQ(read_u64_le(bytes, 4), 2u);
  EXPECT_EQ(read_u64_le(bytes, 12), 3u);
  // Row-major: the second stored value is m(0, 1).
  EXPECT_EQ(std::bit_cast<double>(read_u64_le(bytes, 20 + 8)), 2.0);
  EXPECT_EQ(std::bit_cast<double>(read_u64_le(bytes, 20 + 5 * 8)), 6.5);
}

TEST(Rkm1, RoundTripIsBitExact) {
  Rng rng = make_rng(11, 0);
  DenseMatrix m = testing::gaussian(7, 5, rng);
  m(0, 0) = -0.0;
  m(1, 1) = std::numeric_limits<double>::denorm_min();
  m(2, 2) = std::numeric_limits<double>::max();
  const DenseMatrix back = io::decode_rkm1(io::encode_rkm1(m));
  ASSERT_EQ(back.rows(), 7);
  ASSERT_EQ(back.cols(), 5);
  for (Index k = 0; k < m.size(); ++k) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back.data()[k]), std::bit_cast<std::uint64_t>(m.data()[k]));
  }
}

TEST(Rkm1, RejectsBadMagicAndTruncation) {
  const std::string good = io::encode_rkm1(DenseMatrix::Ones(2, 2));
  std::string bad = good;
  bad[0] = 'X';
  EXPECT_THROW(io::decode_rkm1(bad), InvalidData);
  EXPECT_THROW(io::decode_rkm1(good.substr(0, 10)), InvalidData);
  EXPECT_THROW(io::decode_rkm1(good.substr(0, good.size() - 1)), InvalidData);
  EXPECT_THROW(io::decode_rkm1(good + "x"), InvalidData);
}

TEST(Csv, ParsesWithAndWithoutHeader) {
  std::istringstream plain("1,2,3\n4,5,6\n");
  const DenseMatrix a = io::parse_csv(plain, false);
  ASSERT_EQ(a.rows(), 2);
  ASSERT_EQ(a.cols(), 3);
  EXPECT_EQ(a(1, 2), 6.0);
  std::istringstream headed("x,y\n1.5,-2e3\n\n0,1\n");
  const DenseMatrix b = io::parse_csv(headed, true);
  ASSERT_EQ(b.rows(), 2);
  EXPECT_EQ(b(0, 1), -2000.0);
}

TEST(Csv, RejectsRaggedAndGarbage) {
  std::istringstream ragged("1,2\n3\n");
  EXPECT_THROW(io::parse_csv(ragged, false), InvalidData);
  std::istringstream garbage("1,abc\n");
  EXPECT_THROW(io::parse_csv(garbage, false), InvalidData);
  std::istringstream nan("1,nan\n");
  EXPECT_THROW(io::parse_csv(nan, false), InvalidData);
  std::istringstream empty("");
  EXPECT_THROW(io::parse_csv(empty, false), InvalidData);
}

TEST(MatrixMarket, CoordinateGeneralIsSparse) {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real general\n"
      "% comment\n"
      "3 4 3\n"
      "1 1 2.5\n"
      "3 4 -1\n"
      "2 2 7\n");
  const RawMatrix m = io::parse_matrix_market(in);
  ASSERT_TRUE(m.is_sparse());
  EXPECT_EQ(m.rows(), 3);
  EXPECT_EQ(m.cols(), 4);
  const DenseMatrix d = m.to_dense();
  EXPECT_EQ(d(0, 0), 2.5);
  EXPECT_EQ(d(2, 3), -1.0);
  EXPECT_EQ(d(1, 1), 7.0);
  EXPECT_EQ(d.sum(), 8.5);
}

TEST(MatrixMarket, SymmetricPatternAndArray) {
  std::istringstream sym(
      "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1\n2 1 3\n");
  const DenseMatrix s = io::parse_matrix_market(sym).to_dense();
  EXPECT_EQ(s(0, 1), 3.0);
  EXPECT_EQ(s(1, 0), 3.0);
  std::istringstream pattern("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n2 2\n");
  EXPECT_EQ(io::parse_matrix_market(pattern).to_dense()(1, 1), 1.0);
  // Array layout is column-major.
  std::istringstream array("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n");
  const DenseMatrix a = io::parse_matrix_market(array).to_dense();
  EXPECT_EQ(a(1, 0), 2.0);
  EXPECT_EQ(a(0, 1), 3.0);
}

TEST(MatrixMarket, RejectsMalformedInput) {
  std::istringstream banner("%%NotMatrixMarket\n1 1 0\n");
  EXPECT_THROW(io::parse_matrix_market(banner), InvalidData);
  std::istringstream complex("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n");
  EXPECT_THROW(io::parse_matrix_market(complex), InvalidData);
  std::istringstream bounds("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n");
  EXPECT_THROW(io::parse_matrix_market(bounds), InvalidData);
  std::istringstream dup("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 1 2\n");
  EXPECT_THROW(io::parse_matrix_market(dup), InvalidData);
  std::istringstream short_body("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n");
  EXPECT_THROW(io::parse_matrix_market(short_body), InvalidData);
}

TEST(MatrixFormat, NamesAndErrors) {
  EXPECT_EQ(io::parse_matrix_format("mm"), io::MatrixFormat::kMatrixMarket);
  EXPECT_EQ(io::parse_matrix_format("rkm1"), io::MatrixFormat::kRkm1);
  EXPECT_THROW(io::parse_matrix_format("xlsx"), InvalidData);
}

TEST_F(TempDir, ReadMatrixSniffsFormat) {
  DenseMatrix m(2, 2);
  m << 1, 2, 3, 4;
  io::write_rkm1(dir_ / "m.rkm1", m);
  EXPECT_EQ(io::read_matrix(dir_ / "m.rkm1").to_dense(), m);
  { std::ofstream(dir_ / "m.csv") << "1,2\n3,4\n"; }
  EXPECT_EQ(io::read_matrix(dir_ / "m.csv").to_dense(), m);
  { std::ofstream(dir_ / "m.mtx") << "%%MatrixMarket matrix array real general\n2 2\n1\n3\n2\n4\n"; }
  EXPECT_EQ(io::read_matrix(dir_ / "m.mtx").to_dense(), m);
  EXPECT_THROW(io::read_matrix(dir_ / "missing.csv"), InvalidData);
}

TEST_F(TempDir, AtomicWriteReplacesWholeFileAndLeavesNoStaging) {
  const fs::path target = dir_ / "out.bin";
  io::write_file_atomic(target, "first");
  io::write_file_atomic(target, "second");
  EXPECT_EQ(io::read_file(target), "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir_)) ++entries;
  EXPECT_EQ(entries, 1u);
}

TEST_F(TempDir, AtomicWriteFailureLeavesTargetUntouched) {
  const fs::path target = dir_ / "missing_dir" / "out.bin";
  EXPECT_THROW(io::write_file_atomic(target, "data"), InvalidData);
  EXPECT_FALSE(fs::exists(target));
}

}  // namespace
}  // namespace rklda
