float a, b, c, x, y;

x = a + b;
y = c * 2;
x = x + y;
