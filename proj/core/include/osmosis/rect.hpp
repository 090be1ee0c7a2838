#ifndef OSMOSIS_RECT_HPP
#define OSMOSIS_RECT_HPP

#include <string>

namespace osmosis {

/// Axis-aligned pixel rectangle: covers columns [x, x+width) and rows [y, y+height).
struct Rect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool empty() const { return width <= 0 || height <= 0; }
    bool contains(int col, int row) const {
        return col >= x && col < x + width && row >= y && row < y + height;
    }
    bool operator==(const Rect&) const = default;
};

inline std::string to_string(const Rect& r) {
    return "[x=" + std::to_string(r.x) + ",y=" + std::to_string(r.y) +
           ",w=" + std::to_string(r.width) + ",h=" + std::to_string(r.height) + "]";
}

}  // namespace osmosis

#endif  // OSMOSIS_RECT_HPP
