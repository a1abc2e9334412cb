#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace torsmink {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Measure construction
struct NonPositiveWeight : Error { using Error::Error; };
struct HemisphereViolation : Error { using Error::Error; };
struct TooFewNormals : Error { using Error::Error; };

// Wulff shape / polygon construction
struct EmptyInterior : Error { using Error::Error; };
struct Unbounded : Error { using Error::Error; };
struct InvalidPolygon : Error { using Error::Error; };

// Meshing / FEM
struct DegenerateGeometry : Error { using Error::Error; };
struct SolverDiverged : Error { using Error::Error; };
struct IdentityMismatch : Error { using Error::Error; };

// L_p measure / solver
struct OriginOnBoundary : Error { using Error::Error; };
struct MissingFacet : Error { using Error::Error; };
struct MaxItersExceeded : Error {
    MaxItersExceeded(const std::string& msg, double final_residual,
                     std::vector<double> history = {})
        : Error(msg), residual(final_residual), residual_history(std::move(history)) {}
    double residual;
    std::vector<double> residual_history;
};
struct PCritical : Error { using Error::Error; };

// I/O
struct InputError : Error { using Error::Error; };

} // namespace torsmink
