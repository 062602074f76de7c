// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "autoodd/descriptor_space.hpp"

#include <string>

namespace autoodd::testing {

inline const char* kColorList =
    R"(["blue", "orange", "green", "red", "purple", "brown", "pink", "gray", "yellow", "cyan"])";

/// digit (ordinal 0..9) x color (10 keywords): the 100-scenario grid.
inline DescriptorSpace digit_color_space() {
    const std::string config = std::string(R"({
      "task_description": "Audit a model that reads colored digits; find the digit and color combinations it fails on.",
      "categories": [
        {"name": "digit", "keywords": ["0","1","2","3","4","5","6","7","8","9"]},
        {"name": "color", "keywords": )") + kColorList + R"(}
      ]
    })";
    return load_space(config);
}

/// color first, digit second: the generate(color, digit) argument order.
inline DescriptorSpace color_digit_space() {
    const std::string config = std::string(R"({
      "task_description": "Audit a model that reads colored digits; find the color and digit combinations it fails on.",
      "categories": [
        {"name": "color", "keywords": )") + kColorList + R"(},
        {"name": "digit", "keywords": ["0","1","2","3","4","5","6","7","8","9"]}
      ]
    })";
    return load_space(config);
}

/// Five axes sized 3,4,6,4,5: the 1440-scenario grid.
inline DescriptorSpace daa_space() {
    return load_space(R"({
      "task_description": "Audit a vision-based aircraft detector across environment conditions; find the combinations where it fails.",
      "categories": [
        {"name": "time of day", "keywords": ["twilight", "afternoon", "sunset"]},
        {"name": "cloud cover", "keywords": ["clear", "scattered", "broken", "overcast"]},
        {"name": "background", "keywords": ["city with low rises", "city with high rises", "small mountains", "tall mountains", "open fields", "industrial area"]},
        {"name": "season", "keywords": ["summer", "fall", "winter with snow", "rainy"]},
        {"name": "weather", "keywords": ["none", "heavy rain", "snow", "fog", "thunderstorm"]}
      ]
    })");
}

} // namespace autoodd::testing
