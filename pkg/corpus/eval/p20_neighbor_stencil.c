float v[N], w[N];

for (int i = 1; i < N - 1; i++) {
    w[i] = v[i - 1] + v[i + 1];
}
for (int i = 1; i < N - 1; i++) {
    v[i] = w[i] * 2;
}
