#include "pigan/common.hpp"

#include <sstream>

namespace pigan {

std::string RandomStream::save_state() const {
    std::ostringstream os;
    os << engine_ << ' ' << (have_spare_ ? 1 : 0) << ' ';
    os.precision(17);
    os << std::hexfloat << spare_;
    return os.str();
}

void RandomStream::restore_state(const std::string& blob) {
    std::istringstream is(blob);
    int spare_flag = 0;
    is >> engine_ >> spare_flag >> std::hexfloat >> spare_;
    if (is.fail()) throw FormatError("invalid random stream state blob");
    have_spare_ = spare_flag != 0;
}

}  // namespace pigan
