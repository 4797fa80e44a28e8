#ifndef OASD_ERROR_HPP
#define OASD_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace oasd {

// All failures surface as Error with a short machine-readable code.
// The CLI maps code/message onto its JSON error envelope.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline Error parse_error(const std::string& msg) { return {"parse", msg}; }
inline Error validation_error(const std::string& msg) { return {"validation", msg}; }
inline Error not_found_error(const std::string& msg) { return {"not_found", msg}; }
inline Error config_error(const std::string& msg) { return {"config", msg}; }
inline Error shape_error(const std::string& msg) { return {"shape", msg}; }
inline Error contract_error(const std::string& msg) { return {"contract", msg}; }
inline Error stream_error(const std::string& msg) { return {"stream", msg}; }
inline Error io_error(const std::string& msg) { return {"io", msg}; }

}  // namespace oasd

#endif  // OASD_ERROR_HPP
