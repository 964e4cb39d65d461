#pragma once

#include <stdexcept>
#include <string>

namespace fastsum {

//! A particle lies outside the configured domain. Carries the offending index.
class out_of_domain_error : public std::invalid_argument {
 public:
  out_of_domain_error(std::size_t particle_index, const std::string& what)
      : std::invalid_argument(what), particle_index_(particle_index) {}
  std::size_t particle_index() const { return particle_index_; }

 private:
  std::size_t particle_index_;
};

//! M2L translation requested between coincident centers (t = 0).
class singular_translation_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

//! A translation plan references a source box with no expansion.
class plan_consistency_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

//! A chip-spec document is missing or mistypes a field. Carries the field name.
class spec_parse_error : public std::runtime_error {
 public:
  spec_parse_error(const std::string& field, const std::string& what)
      : std::runtime_error(what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace fastsum
