float v[N], w[N], a, b;

for (int i = 0; i < N; i++) {
    w[i] = (a + b) * v[i];
}
