#include "warpimm/harness/generators.hpp"

#include <array>

namespace warpimm::harness {

namespace {

MatrixXd lowRank(int n, int rank, Rng& rng) {
  MatrixXd a = MatrixXd::Zero(n, n);
  for (int r = 0; r < rank; ++r) {
    const VectorXd v = randomGaussian(n, rng);
    a += (r % 2 == 0 ? 1.0 : -1.0) * v * v.transpose();
  }
  return a;
}

std::vector<MatrixXd> rotateNormal(const std::vector<MatrixXd>& ops, Rng& rng) {
  const int p = static_cast<int>(ops.size());
  const MatrixXd r = randomOrthogonal(p, rng);
  std::vector<MatrixXd> out;
  for (int b = 0; b < p; ++b) {
    MatrixXd m = MatrixXd::Zero(ops[0].rows(), ops[0].cols());
    for (int a = 0; a < p; ++a) m += r(a, b) * ops[static_cast<std::size_t>(a)];
    out.push_back(m);
  }
  return out;
}

}  // namespace

forms::SymmetricBilinearForm randomForm(int n, int p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<MatrixXd> ops;
  for (int a = 0; a < p; ++a) ops.push_back(randomSymmetric(n, rng));
  return forms::SymmetricBilinearForm::make(ops);
}

std::vector<CorpusItem> nullityCorpus(int count, std::uint64_t seed) {
  static const std::array<const char*, 6> names{"generic",     "common-kernel", "low-rank-member",
                                                "block-split", "composition",   "umbilic-low-rank"};
  std::vector<CorpusItem> out;
  for (int i = 0; i < count; ++i) {
    Rng rng(deriveSeed(seed, static_cast<std::uint64_t>(i)));
    std::uniform_int_distribution<int> dimN(3, 8), dimP(1, 3);
    const int n = dimN(rng), p = dimP(rng);
    const int family = i % static_cast<int>(names.size());
    std::vector<MatrixXd> ops;
    switch (family) {
      case 0:
        for (int a = 0; a < p; ++a) ops.push_back(randomSymmetric(n, rng));
        break;
      case 1: {
        const int k = std::uniform_int_distribution<int>(1, n - 1)(rng);
        const MatrixXd q = randomOrthogonal(n, rng);
        for (int a = 0; a < p; ++a) {
          MatrixXd m = MatrixXd::Zero(n, n);
          m.topLeftCorner(n - k, n - k) = randomSymmetric(n - k, rng);
          ops.push_back(q * m * q.transpose());
        }
        break;
      }
      case 2:
        ops.push_back(lowRank(n, std::uniform_int_distribution<int>(1, n - 1)(rng), rng));
        for (int a = 1; a < p; ++a) ops.push_back(randomSymmetric(n, rng));
        break;
      case 3: {
        const int d1 = std::uniform_int_distribution<int>(1, n - 1)(rng);
        for (int a = 0; a < p; ++a) {
          MatrixXd m = MatrixXd::Zero(n, n);
          if (a % 2 == 0)
            m.topLeftCorner(d1, d1) = randomSymmetric(d1, rng);
          else
            m.bottomRightCorner(n - d1, n - d1) = randomSymmetric(n - d1, rng);
          ops.push_back(m);
        }
        break;
      }
      case 4:
        for (int a = 0; a + 1 < p; ++a) ops.push_back(randomSymmetric(n, rng));
        ops.push_back(lowRank(n, 1, rng));
        break;
      default:
        ops.push_back(MatrixXd::Identity(n, n));
        for (int a = 1; a < p; ++a) ops.push_back(lowRank(n, std::min(2, n - 1), rng));
        break;
    }
    out.push_back({names[static_cast<std::size_t>(family)], forms::SymmetricBilinearForm::make(rotateNormal(ops, rng))});
  }
  return out;
}

}  // namespace warpimm::harness
