#pragma once

#include <stdexcept>
#include <string>

namespace e3p {

// Operand shapes or dimensions disagree.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A softmax row whose mask admits no position at all.
class AllMaskedRow : public std::runtime_error {
 public:
  explicit AllMaskedRow(const std::string& msg) : std::runtime_error(msg) {}
};

// A forward op produced NaN or Inf.
class NonFiniteError : public std::runtime_error {
 public:
  explicit NonFiniteError(const std::string& msg) : std::runtime_error(msg) {}
};

// File-mode embedding table has no entry for the requested sentence.
class MissingEmbedding : public std::runtime_error {
 public:
  explicit MissingEmbedding(const std::string& msg) : std::runtime_error(msg) {}
};

// Checkpoint contents do not match the architecture being built.
class ArchitectureMismatch : public std::runtime_error {
 public:
  explicit ArchitectureMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace e3p
