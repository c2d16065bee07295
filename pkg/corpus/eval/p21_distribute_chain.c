float a, b, c, d, e, x, y;

x = a * c + b * c;
y = d * c + e * c;
