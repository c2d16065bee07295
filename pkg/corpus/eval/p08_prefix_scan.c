float v[N], w[N];

w[0] = v[0];
for (int i = 0; i < N - 1; i++) {
    w[i + 1] = w[i] + v[i + 1];
}
