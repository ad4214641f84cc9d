#pragma once

#include "fusionattack/image.hpp"

namespace fusion {

// Rotation about the image center, bilinear sampling, reflected fill;
// output keeps the input dimensions.
Image rotate(const Image& img, double degrees);

// Bilinear resize (pixel-center aligned) to round(factor * dims), each at
// least 1.
Image resize(const Image& img, double factor);

}  // namespace fusion
