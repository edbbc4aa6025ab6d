# ML package