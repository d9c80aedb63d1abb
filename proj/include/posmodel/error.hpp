#ifndef POSMODEL_ERROR_HPP
#define POSMODEL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace posmodel {

/// Malformed or inconsistent input (bad file, failed validation, unmet precondition).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Formula text that does not match the grammar. `offset` is a byte offset into the input.
class SyntaxError : public InputError {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : InputError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace posmodel

#endif  // POSMODEL_ERROR_HPP
