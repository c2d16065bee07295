float v[N], w[N], a, b;

for (int i = 0; i < N; i++) {
    if (v[i] > a + b) {
        w[i] = 1;
    } else {
        w[i] = 0;
    }
}
