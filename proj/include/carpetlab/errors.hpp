#pragma once

#include <stdexcept>
#include <string>

namespace carpetlab {

/// A requested construction or solve would exceed a configured size budget.
class BudgetExceeded : public std::runtime_error {
public:
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

/// A linear system or eigenproblem has no unique solution (no absorbing boundary).
class SingularSystem : public std::runtime_error {
public:
    explicit SingularSystem(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace carpetlab
