package app.util;

import java.security.MessageDigest;
import org.bouncycastle.crypto.digests.SHA256Digest;

public class Checksums {
    public byte[] sha256(byte[] data) {
        SHA256Digest digest = new SHA256Digest();
        digest.update(data, 0, data.length);
        byte[] out = new byte[32];
        digest.doFinal(out, 0);
        return out;
    }

    public byte[] sha512(byte[] data) throws Exception {
        return MessageDigest.getInstance("SHA-512").digest(data);
    }

    public String describe() {
        return "checksums";
    }
}
