#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace nanoblock;
using nbtest::random_matrix;

TEST(FockCutoff, RejectsZero) {
    EXPECT_THROW(FockCutoff(0), DomainError);
    EXPECT_EQ(FockCutoff(1).dim(), 2);
    EXPECT_EQ(FockCutoff(7).dim(), 8);
}

TEST(Ladder, LowestMatrices) {
    const OperatorMatrix a = annihilation(FockCutoff(1));
    OperatorMatrix expect(2, 2);
    expect << 0, 1, 0, 0;
    EXPECT_EQ(a, expect);
    EXPECT_EQ(creation(FockCutoff(1)), OperatorMatrix(expect.transpose()));
}

TEST(Ladder, Superdiagonal) {
    const OperatorMatrix a = annihilation(FockCutoff(3));
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j) {
            const Complex want = (j == i + 1) ? Complex(std::sqrt(static_cast<double>(j))) : Complex(0.0);
            EXPECT_EQ(a(i, j), want) << i << "," << j;
        }
}

TEST(Ladder, AnnihilatesVacuum) {
    const FockCutoff c(5);
    StateVector vac = StateVector::Zero(c.dim());
    vac(0) = 1.0;
    EXPECT_EQ((annihilation(c) * vac).norm(), 0.0);
}

TEST(Ladder, PropertiesUpToTwelve) {
    for (int n = 1; n <= 12; ++n) {
        const FockCutoff c(n);
        const OperatorMatrix a = annihilation(c);
        const OperatorMatrix ad = creation(c);
        EXPECT_EQ(ad, OperatorMatrix(a.adjoint())) << n;

        const OperatorMatrix num = ad * a;
        for (Index k = 0; k <= n; ++k) {
            EXPECT_NEAR(std::abs(num(k, k) - Complex(static_cast<double>(k))), 0.0, 1e-14);
        }
        EXPECT_EQ((num - OperatorMatrix(num.diagonal().asDiagonal())).norm(), 0.0);
        EXPECT_LE((number_operator(c) - num).cwiseAbs().maxCoeff(), 1e-14);

        OperatorMatrix expect = identity(c.dim());
        expect(n, n) = -static_cast<double>(n);
        EXPECT_LE((commutator(a, ad) - expect).cwiseAbs().maxCoeff(), 1e-12) << n;
    }
}

TEST(Tensor, IdentityAndDisjointModes) {
    EXPECT_EQ(tensor(identity(2), identity(3)), identity(6));
    OperatorMatrix n(2, 2);
    n << 0, 0, 0, 1;
    const OperatorMatrix x = tensor(n, identity(2));
    const OperatorMatrix y = tensor(identity(2), n);
    EXPECT_EQ(commutator(x, y).norm(), 0.0);
}

TEST(Tensor, IndexFormulaOracle) {
    std::mt19937_64 rng(1);
    const OperatorMatrix a = random_matrix(3, rng);
    const OperatorMatrix b = random_matrix(4, rng);
    const OperatorMatrix t = tensor(a, b);
    ASSERT_EQ(t.rows(), 12);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j)
            for (Index k = 0; k < 4; ++k)
                for (Index l = 0; l < 4; ++l) EXPECT_EQ(t(i * 4 + k, j * 4 + l), a(i, j) * b(k, l));
    const OperatorMatrix ia = tensor(a, identity(4));
    const OperatorMatrix ib = tensor(identity(3), b);
    EXPECT_LE((ia * ib - t).norm(), 1e-12);
}

TEST(Tensor, SparseMatchesDense) {
    std::mt19937_64 rng(2);
    const OperatorMatrix a = random_matrix(3, rng);
    const OperatorMatrix b = random_matrix(2, rng);
    EXPECT_LE((OperatorMatrix(sparse_tensor(to_sparse(a), to_sparse(b))) - tensor(a, b)).norm(), 1e-14);
}

TEST(Vectorize, ColumnStacking) {
    const StateVector v = vectorize(identity(2));
    ASSERT_EQ(v.size(), 4);
    EXPECT_EQ(v(0), Complex(1));
    EXPECT_EQ(v(1), Complex(0));
    EXPECT_EQ(v(2), Complex(0));
    EXPECT_EQ(v(3), Complex(1));

    OperatorMatrix m(2, 2);
    m << 1, 2, 3, 4;
    const StateVector w = vectorize(m);
    EXPECT_EQ(w(0 * 2 + 1), m(1, 0));
    EXPECT_EQ(w(1 * 2 + 0), m(0, 1));
}

TEST(Vectorize, RoundTrip) {
    std::mt19937_64 rng(3);
    for (Index d : {1, 2, 5, 9}) {
        const OperatorMatrix x = random_matrix(d, rng);
        EXPECT_EQ(devectorize(vectorize(x)), x);
    }
}

TEST(Vectorize, RejectsNonSquareLength) {
    EXPECT_THROW(devectorize(StateVector::Zero(5)), DimensionError);
    EXPECT_THROW(devectorize(StateVector::Zero(0)), DimensionError);
}

TEST(Vectorize, KroneckerIdentityBruteForce) {
    std::mt19937_64 rng(4);
    for (Index d = 1; d <= 9; ++d) {
        for (int trial = 0; trial < 3; ++trial) {
            const OperatorMatrix a = random_matrix(d, rng);
            const OperatorMatrix rho = random_matrix(d, rng);
            const OperatorMatrix b = random_matrix(d, rng);
            const StateVector lhs = vectorize(a * rho * b);
            const StateVector rhs = tensor(b.transpose(), a) * vectorize(rho);
            EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, lhs.cwiseAbs().maxCoeff()))
                << "dim " << d;
        }
    }
}

TEST(DensityMatrix, Validation) {
    OperatorMatrix good = OperatorMatrix::Zero(2, 2);
    good(0, 0) = 0.25;
    good(1, 1) = 0.75;
    EXPECT_NO_THROW(DensityMatrix{good});

    OperatorMatrix bad_trace = good * 2.0;
    EXPECT_THROW(DensityMatrix{bad_trace}, InvariantError);

    OperatorMatrix non_herm = good;
    non_herm(0, 1) = 0.1;
    EXPECT_THROW(DensityMatrix{non_herm}, InvariantError);

    OperatorMatrix negative = OperatorMatrix::Zero(2, 2);
    negative(0, 0) = 1.1;
    negative(1, 1) = -0.1;
    EXPECT_THROW(DensityMatrix{negative}, InvariantError);

    EXPECT_THROW(DensityMatrix{OperatorMatrix::Zero(2, 3)}, DimensionError);
}

TEST(DensityMatrix, FromUnnormalizedAndPure) {
    std::mt19937_64 rng(5);
    const DensityMatrix r = nbtest::random_density(4, rng);
    EXPECT_NEAR(r.op().trace().real(), 1.0, 1e-12);
    EXPECT_GE(r.min_eigenvalue(), -1e-12);

    StateVector psi(2);
    psi << Complex(1, 0), Complex(0, 1);
    const DensityMatrix p = DensityMatrix::pure(psi);
    EXPECT_NEAR((p.op() * p.op()).trace().real(), 1.0, 1e-12);
}

TEST(TraceDistance, Basics) {
    OperatorMatrix a = OperatorMatrix::Zero(2, 2), b = OperatorMatrix::Zero(2, 2);
    a(0, 0) = 1.0;
    b(1, 1) = 1.0;
    EXPECT_NEAR(trace_distance(a, b), 1.0, 1e-14);
    EXPECT_NEAR(trace_distance(a, a), 0.0, 1e-14);
    EXPECT_THROW(trace_distance(a, OperatorMatrix::Zero(3, 3)), DimensionError);
}
