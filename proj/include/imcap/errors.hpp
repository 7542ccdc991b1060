// SPDX-License-Identifier: MIT

#ifndef IMCAP_ERRORS_HPP
#define IMCAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace imcap {

// Thrown when an algorithm cannot certify its accuracy target.
// `achieved` is the error bound the computation actually reached.
class accuracy_error : public std::runtime_error {
  public:
    accuracy_error(const std::string &what, double achieved) : std::runtime_error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

  private:
    double achieved_;
};

} // namespace imcap

#endif
