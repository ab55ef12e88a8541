#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace reachplan {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (dimension mismatch, invalid spec, ...).
class ContractError : public Error {
  public:
    using Error::Error;
};

class NumericalError : public Error {
  public:
    using Error::Error;
};

class BuildError : public Error {
  public:
    using Error::Error;
};

// Malformed region, intersection or plan text file.
class FormatError : public Error {
  public:
    using Error::Error;
};

class GridMismatchError : public Error {
  public:
    using Error::Error;
};

class FingerprintMismatchError : public Error {
  public:
    using Error::Error;
};

class DbLoadError : public Error {
  public:
    enum class Kind { Io, BadMagic, UnsupportedVersion, Truncated, ChecksumMismatch, Corrupt };

    DbLoadError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

  private:
    Kind kind_;
};

// Some trays cannot be served by any candidate base position.
class InfeasibleError : public Error {
  public:
    InfeasibleError(std::vector<std::string> trays, const std::string& what)
        : Error(what), trays_(std::move(trays)) {}
    const std::vector<std::string>& trays() const noexcept { return trays_; }

  private:
    std::vector<std::string> trays_;
};

class SceneError : public Error {
  public:
    SceneError(std::string code, std::string path, const std::string& message)
        : Error(code + " at " + (path.empty() ? std::string("<root>") : path) + ": " + message),
          code_(std::move(code)), path_(std::move(path)) {}
    const std::string& code() const noexcept { return code_; }
    const std::string& path() const noexcept { return path_; }

  private:
    std::string code_;
    std::string path_;
};

} // namespace reachplan
