#pragma once

#include <stdexcept>
#include <string>

namespace loadsig {

// Broad failure classes. The CLI maps Config to exit code 1 and Data to 2.
enum class ErrorKind {
    Config,        // bad parameters, condition tables, scenario files
    Data,          // malformed or unusable input recordings
    Domain,        // a formula evaluated outside its domain (e.g. THD with i1 = 0)
    Convergence,   // an iterative algorithm hit its iteration cap
    Insufficient,  // not enough events to draw a conclusion
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace loadsig
