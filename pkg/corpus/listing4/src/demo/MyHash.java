package demo;

/** A homegrown checksum; no standard crypto library is involved. */
public class MyHash {
    public byte[] sha256(byte[] data) {
        byte[] out = new byte[32];
        int acc = 17;
        for (int i = 0; i < data.length; i++) {
            acc = acc * 31 + data[i];
            out[i % 32] = (byte) acc;
        }
        return out;
    }
}
