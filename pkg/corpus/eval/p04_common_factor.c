float v[N], w[N], a, b;

for (int i = 0; i < N; i++) {
    w[i] = a * v[i] + b * v[i];
}
