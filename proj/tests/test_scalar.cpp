#include "doctest.h"

#include "virakdv/matrix.hpp"
#include "virakdv/scalar.hpp"

using namespace virakdv;

TEST_CASE("scalar arithmetic stays in lowest terms") {
    Scalar a(2, 4);
    CHECK(a.str() == "1/2");
    Scalar b(-6, 9);
    CHECK(b.str() == "-2/3");
    CHECK((a + b).str() == "-1/6");
    CHECK((a * b).str() == "-1/3");
    CHECK((a / b) == Scalar(-3, 4));
    CHECK((a - a).is_zero());
    CHECK(Scalar(7, -14) == Scalar(-1, 2));
}

TEST_CASE("scalar parse and print round-trip") {
    for (const char* s : {"0/1", "1/3", "-22/7", "5/1", "-1/16"}) {
        Scalar x = Scalar::from_string(s);
        CHECK(x.str() == s);
        CHECK(Scalar::from_string(x.str()) == x);
    }
    CHECK(Scalar::from_string("3") == Scalar(3));
    CHECK(Scalar::from_string("-4/8") == Scalar(-1, 2));
    CHECK_THROWS_AS(Scalar::from_string("1/0"), Error);
}

TEST_CASE("pochhammer and factorials") {
    CHECK(pochhammer(Scalar(1, 2), 2) == Scalar(3, 4));
    CHECK(pochhammer(Scalar(123, 7), 0) == Scalar(1));
    CHECK(pochhammer(Scalar(-3, 2), 3) == Scalar(3, 8));
    CHECK(double_factorial(7) == Scalar(105));
    CHECK(double_factorial(1) == Scalar(1));
    CHECK(factorial(5) == Scalar(120));
    CHECK(binomial(6, 3) == Scalar(20));
}

TEST_CASE("exact square roots") {
    CHECK(Scalar(9, 4).sqrt_exact().value() == Scalar(3, 2));
    CHECK(Scalar(1).sqrt_exact().value() == Scalar(1));
    CHECK(!Scalar(2).sqrt_exact().has_value());
    CHECK(!Scalar(-1).sqrt_exact().has_value());
    CHECK(Scalar(0).sqrt_exact().value() == Scalar(0));
}

TEST_CASE("matrix inverse and products") {
    Matrix m(2, 2, {Scalar(1), Scalar(2), Scalar(3), Scalar(5)});
    Matrix inv = m.inverse();
    CHECK(m * inv == Matrix::identity(2));
    CHECK(inv * m == Matrix::identity(2));
    Matrix sing(2, 2, {Scalar(1), Scalar(2), Scalar(2), Scalar(4)});
    CHECK_THROWS_AS(sing.inverse(), SingularMatrix);
    CHECK((m - m).is_zero());
    CHECK(m.transpose()(0, 1) == Scalar(3));
    CHECK(m.trace() == Scalar(6));
}

TEST_CASE("sparse solver handles redundant consistent rows") {
    SparseLinearSystem sys(2);
    sys.add_row({{0, Scalar(1)}, {1, Scalar(1)}}, Scalar(3));
    sys.add_row({{0, Scalar(1)}, {1, Scalar(-1)}}, Scalar(1));
    sys.add_row({{0, Scalar(2)}, {1, Scalar(2)}}, Scalar(6));
    auto x = sys.solve("demo");
    CHECK(x[0] == Scalar(2));
    CHECK(x[1] == Scalar(1));

    SparseLinearSystem bad(1);
    bad.add_row({{0, Scalar(1)}}, Scalar(1));
    bad.add_row({{0, Scalar(1)}}, Scalar(2));
    CHECK_THROWS_AS(bad.solve("demo"), SingularMatrix);

    SparseLinearSystem under(2);
    under.add_row({{0, Scalar(1)}}, Scalar(1));
    CHECK_THROWS_AS(under.solve("demo"), SingularMatrix);
}
