#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rqrao {

using cx = std::complex<double>;
using Matrix2cd = Eigen::Matrix2cd;
using Vector2cd = Eigen::Vector2cd;

enum class Pauli : int { I = 0, X = 1, Y = 2, Z = 3 };

inline char pauli_char(Pauli p) {
    switch (p) {
        case Pauli::I: return 'I';
        case Pauli::X: return 'X';
        case Pauli::Y: return 'Y';
        case Pauli::Z: return 'Z';
    }
    return '?';
}

inline Pauli pauli_from_char(char c) {
    switch (c) {
        case 'I': return Pauli::I;
        case 'X': return Pauli::X;
        case 'Y': return Pauli::Y;
        case 'Z': return Pauli::Z;
    }
    throw std::invalid_argument(std::string("not a Pauli label: ") + c);
}

inline const Matrix2cd& pauli_matrix(Pauli p) {
    static const Matrix2cd i2 = Matrix2cd::Identity();
    static const Matrix2cd x = (Matrix2cd() << 0, 1, 1, 0).finished();
    static const Matrix2cd y = (Matrix2cd() << 0, cx(0, -1), cx(0, 1), 0).finished();
    static const Matrix2cd z = (Matrix2cd() << 1, 0, 0, -1).finished();
    switch (p) {
        case Pauli::I: return i2;
        case Pauli::X: return x;
        case Pauli::Y: return y;
        case Pauli::Z: return z;
    }
    return i2;
}

} // namespace rqrao
