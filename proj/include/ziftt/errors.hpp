#pragma once

#include <stdexcept>
#include <string>

namespace ziftt {

/// Base of every error thrown by the library.
class error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A field value lies outside its permitted range. `field()` names it.
class range_error : public error
{
public:
  range_error(std::string field, const std::string& what)
    : error(field + ": " + what)
    , m_field(std::move(field))
  {
  }

  [[nodiscard]] const std::string& field() const noexcept { return m_field; }

private:
  std::string m_field;
};

class malformed_frame : public error
{
public:
  using error::error;
};

/// Invalid or incomplete configuration (bad clock, missing register, ...).
class config_error : public error
{
public:
  using error::error;
};

/// The command schedule cannot be executed as given.
class schedule_error : public error
{
public:
  using error::error;
};

class measurement_error : public error
{
public:
  using error::error;
};

/// Packet filtering would discard too much of the capture.
class too_noisy_error : public error
{
public:
  using error::error;
};

/// Unreadable, truncated, or otherwise unusable I/Q capture.
class capture_error : public error
{
public:
  using error::error;
};

} // namespace ziftt
