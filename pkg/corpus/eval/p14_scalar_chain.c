float a, b, c, x, y, z;

x = a * c + b * c;
y = x + 1;
z = x + y;
