#include "sbpsat/errors.hpp"

namespace sbpsat {

int exit_code(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::invariant: return 1;
    case ErrorKind::config: return 2;
    case ErrorKind::blowup: return 3;
    }
    return 1;
}

}  // namespace sbpsat
