#include <gtest/gtest.h>

#include <sstream>

#include "semilab/io.hpp"

using namespace semilab;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Parse, Reals) {
    EXPECT_EQ(io::parse_real("1.5"), 1.5);
    EXPECT_EQ(io::parse_real(" -2e-3 "), -2e-3);
    EXPECT_EQ(io::parse_real("+4"), 4.0);
    EXPECT_EQ(kind_of([] { (void)io::parse_real("1.5x"); }), ErrorKind::ParseError);
    EXPECT_EQ(kind_of([] { (void)io::parse_real(""); }), ErrorKind::ParseError);
    EXPECT_EQ(io::parse_int("42"), 42);
    EXPECT_EQ(kind_of([] { (void)io::parse_int("4.2"); }), ErrorKind::ParseError);
}

TEST(Parse, ComplexLiterals) {
    EXPECT_EQ(io::parse_complex("3"), Complex(3.0, 0.0));
    EXPECT_EQ(io::parse_complex("2i"), Complex(0.0, 2.0));
    EXPECT_EQ(io::parse_complex("2+3i"), Complex(2.0, 3.0));
    EXPECT_EQ(io::parse_complex("-3+1i"), Complex(-3.0, 1.0));
    EXPECT_EQ(io::parse_complex("1 - 0.5i"), Complex(1.0, -0.5));
    EXPECT_EQ(io::parse_complex("i"), Complex(0.0, 1.0));
    EXPECT_EQ(io::parse_complex("-i"), Complex(0.0, -1.0));
    EXPECT_EQ(io::parse_complex("1e-3+2e+1i"), Complex(1e-3, 20.0));
    EXPECT_EQ(kind_of([] { (void)io::parse_complex("2+3j"); }), ErrorKind::ParseError);
    const auto l = io::parse_complex_list("[1, 2i, -3-4i]");
    ASSERT_EQ(l.size(), 3u);
    EXPECT_EQ(l[2], Complex(-3.0, -4.0));
}

TEST(Parse, OperatorFiles) {
    {
        const auto op = io::load_operator(std::string(SEMILAB_SAMPLES_DIR) + "/diag_stable.op");
        EXPECT_EQ(op.dim(), 2);
        EXPECT_EQ(op.structure(), Structure::diagonal);
        EXPECT_EQ(op.spectral_bound(), -1.0);
    }
    {
        const auto op = io::load_operator(std::string(SEMILAB_SAMPLES_DIR) + "/laplacian64.op");
        EXPECT_EQ(op.dim(), 64);
        EXPECT_EQ(op.structure(), Structure::tridiagonal);
    }
    {
        const auto op = io::load_operator(std::string(SEMILAB_SAMPLES_DIR) + "/dense_rows.op");
        EXPECT_EQ(op.dim(), 3);
        EXPECT_EQ(op.e0_norm(), NormKind::sup);
        EXPECT_EQ(op.matrix()(1, 1), Complex(-3.0, 1.0));
    }
    {
        const auto op = io::parse_operator_text("jordan lambda=-1 size=3\n");
        EXPECT_EQ(op.matrix()(0, 1), Complex(1.0, 0.0));
        EXPECT_EQ(op.matrix()(2, 2), Complex(-1.0, 0.0));
    }
}

TEST(Parse, OperatorErrors) {
    for (const char* bad : {"", "dim = 2\nrow = 1, 2\n", "row = 1, 2\nrow = 3\n", "diag 1, 2\ndiag 3\n",
                            "dim = 3\ndiag -1, -2\n", "structure = diagonal\nrow = 1, 1\nrow = 0, 1\n",
                            "e0_norm = l7\ndiag 1\n", "laplacian1d n=0\n", "frobnicate 3\n", "row = 1, x\n"}) {
        EXPECT_EQ(kind_of([&] { (void)io::parse_operator_text(bad); }), ErrorKind::ParseError) << bad;
    }
    EXPECT_EQ(kind_of([] { (void)io::load_operator("/nonexistent/op"); }), ErrorKind::ParseError);
}

TEST(Parse, Probes) {
    std::istringstream in("exp mu=2+3i y=e2\npoly coeffs=1,0,1\nic x=[1,2i]\n# comment\nexp mu=1 y=random\n");
    const auto p = io::parse_probes(in, 2, 7);
    ASSERT_EQ(p.size(), 4u);
    EXPECT_EQ(p[0].f.at(0.0), Vec::Unit(2, 1));
    EXPECT_LE((p[0].f.at(1.0) - std::exp(Complex(-2.0, -3.0)) * Vec::Unit(2, 1)).norm(), 1e-15);
    EXPECT_LE((p[1].f.at(2.0) - 5.0 * Vec::Ones(2)).norm(), 1e-14);
    EXPECT_TRUE(p[1].x.isZero(0.0));
    EXPECT_EQ(p[2].x(1), Complex(0.0, 2.0));
    EXPECT_TRUE(p[2].f.is_zero());

    std::istringstream again("exp mu=2+3i y=e2\npoly coeffs=1,0,1\nic x=[1,2i]\nexp mu=1 y=random\n");
    const auto q = io::parse_probes(again, 2, 7);
    EXPECT_EQ(p[3].f.at(0.5), q[3].f.at(0.5));

    const auto samples = io::load_probes(std::string(SEMILAB_SAMPLES_DIR) + "/probes.txt", 3, 1);
    EXPECT_EQ(samples.size(), 6u);
}

TEST(Parse, ProbeErrors) {
    for (const char* bad : {"exp mu=1\n", "exp y=ones\n", "exp mu=1 y=e9\n", "ic x=1,2,3\n", "wave k=1\n",
                            "ic x=ones extra=1\n", "poly y=ones\n"}) {
        std::istringstream in(bad);
        EXPECT_EQ(kind_of([&] { (void)io::parse_probes(in, 2, 0); }), ErrorKind::ParseError) << bad;
    }
    std::istringstream empty("# nothing\n\n");
    EXPECT_EQ(kind_of([&] { (void)io::parse_probes(empty, 2, 0); }), ErrorKind::EmptyProbeSet);
}

TEST(Parse, MuGrids) {
    {
        const auto g = io::parse_mu_grid("re=1:100:3,im=-1:1:3");
        ASSERT_EQ(g.size(), 9u);
        EXPECT_NEAR(g[3].real(), 10.0, 1e-12);
        EXPECT_EQ(g[0].imag(), -1.0);
        EXPECT_EQ(g[1].imag(), 0.0);
    }
    {
        const auto g = io::parse_mu_grid("re=0.5:32:5:lin,im=-16:16:5");
        ASSERT_EQ(g.size(), 25u);
        EXPECT_EQ(g[5].real(), 0.5 + 31.5 / 4.0);
    }
    {
        const auto g = io::parse_mu_grid("re=1:4:4:lin");
        ASSERT_EQ(g.size(), 4u);
        EXPECT_EQ(g[3], Complex(4.0, 0.0));
    }
    {
        const auto g = io::parse_mu_grid("list=1;2+1i; -i");
        ASSERT_EQ(g.size(), 3u);
        EXPECT_EQ(g[2], Complex(0.0, -1.0));
    }
    for (const char* bad : {"re=1:2", "re=1:2:0", "foo", "re=a:2:3", "list=1;;2", "re=1:2:3:cubic"})
        EXPECT_EQ(kind_of([&] { (void)io::parse_mu_grid(bad); }), ErrorKind::ParseError) << bad;
}
